#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "shiftlab/harness.hpp"

namespace shiftlab {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<int> to_int_list(const std::vector<double>& values, const char* what) {
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v || i < 1)
      throw std::runtime_error(std::string("config: ") + what +
                               " must be positive integers");
    out.push_back(i);
  }
  return out;
}

}  // namespace

std::string EnvConfig::tag() const {
  if (kind == "grid_maze") return "grid_maze_s" + std::to_string(maze.size);
  if (kind == "mountain_car") return "mountain_car";
  if (kind == "point_mass")
    return point_mass.reward == PointMassReward::Dense ? "point_mass_dense"
                                                       : "point_mass_sparse";
  throw std::runtime_error("config: unknown env kind '" + kind + "'");
}

std::unique_ptr<DiscreteEnv> EnvConfig::make_discrete() const {
  if (kind == "grid_maze") return std::make_unique<GridMaze>(maze);
  if (kind == "mountain_car") return std::make_unique<MountainCar>(mountain_car);
  throw std::runtime_error("config: env kind '" + kind + "' is not discrete");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_from_config(parse_config_file(path));
}

ExperimentConfig experiment_from_config(const Config& cfg) {
  ExperimentConfig exp;
  exp.raw = cfg;
  exp.id = cfg.text("", "id");
  if (!std::regex_match(exp.id, std::regex("[a-z0-9_-]+")))
    throw std::runtime_error("config: id must match [a-z0-9_-]+");
  exp.agent = cfg.text("", "agent");
  const bool known = exp.agent == "tabular" || exp.agent == "dqn" ||
                     exp.agent == "dqn+rnd" || exp.agent == "rrs" ||
                     exp.agent == "offline";
  if (!known)
    throw std::runtime_error("config: unknown agent kind '" + exp.agent + "'");

  for (double s : cfg.number_list("", "seeds")) {
    if (s < 0 || static_cast<double>(static_cast<std::uint64_t>(s)) != s)
      throw std::runtime_error("config: seeds must be non-negative integers");
    exp.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (exp.seeds.empty()) throw std::runtime_error("config: need at least one seed");
  exp.shifts = cfg.number_list_or("", "shifts", {0.0});
  exp.episodes = static_cast<int>(cfg.number("", "episodes"));
  if (exp.episodes < 1) throw std::runtime_error("config: episodes must be >= 1");
  exp.out_dir = cfg.text_or("", "out_dir", "out/" + exp.id);

  exp.env.kind = cfg.text("env", "kind");
  if (exp.env.kind == "grid_maze") {
    exp.env.maze.size = static_cast<int>(cfg.number("env", "size"));
    exp.env.maze.max_steps = static_cast<int>(cfg.number_or("env", "max_steps", 0));
  } else if (exp.env.kind == "mountain_car") {
    exp.env.mountain_car.max_steps =
        static_cast<int>(cfg.number_or("env", "max_steps", 200));
  } else if (exp.env.kind == "point_mass") {
    PointMassSpec& pm = exp.env.point_mass;
    pm.half_width = cfg.number_or("env", "half_width", pm.half_width);
    pm.goal_center[0] = cfg.number_or("env", "goal_x", pm.goal_center[0]);
    pm.goal_center[1] = cfg.number_or("env", "goal_y", pm.goal_center[1]);
    pm.goal_radius = cfg.number_or("env", "goal_radius", pm.goal_radius);
    pm.dt = cfg.number_or("env", "dt", pm.dt);
    pm.max_steps = static_cast<int>(cfg.number_or("env", "max_steps", pm.max_steps));
    const std::string reward = cfg.text_or("env", "reward", "dense");
    if (reward == "dense")
      pm.reward = PointMassReward::Dense;
    else if (reward == "sparse")
      pm.reward = PointMassReward::Sparse;
    else
      throw std::runtime_error("config: [env] reward must be dense or sparse");
  } else {
    throw std::runtime_error("config: unknown env kind '" + exp.env.kind + "'");
  }

  if (exp.agent == "tabular") {
    TabularConfig& t = exp.tabular;
    t.alpha = cfg.number_or("tabular", "alpha", t.alpha);
    t.gamma = cfg.number_or("tabular", "gamma", t.gamma);
    t.q0 = cfg.number_or("tabular", "q0", t.q0);
    t.continuing_bootstrap =
        cfg.flag_or("tabular", "continuing_bootstrap", t.continuing_bootstrap);
    const std::string kind = cfg.text_or("tabular", "exploration", "epsilon_greedy");
    if (kind == "none")
      t.exploration.kind = ExplorationKind::None;
    else if (kind == "epsilon_greedy")
      t.exploration.kind = ExplorationKind::EpsilonGreedy;
    else if (kind == "count_bonus")
      t.exploration.kind = ExplorationKind::CountBonus;
    else
      throw std::runtime_error("config: unknown exploration '" + kind + "'");
    t.exploration.kappa = cfg.number_or("tabular", "kappa", t.exploration.kappa);
    t.exploration.epsilon.start =
        cfg.number_or("tabular", "epsilon_start", t.exploration.epsilon.start);
    t.exploration.epsilon.end =
        cfg.number_or("tabular", "epsilon_end", t.exploration.epsilon.end);
    t.exploration.epsilon.fraction =
        cfg.number_or("tabular", "epsilon_fraction", t.exploration.epsilon.fraction);
  }

  if (exp.agent == "dqn" || exp.agent == "dqn+rnd") {
    DqnConfig& d = exp.dqn;
    d.hidden = to_int_list(
        cfg.number_list_or("dqn", "hidden", {64.0, 64.0}), "[dqn] hidden");
    d.gamma = cfg.number_or("dqn", "gamma", d.gamma);
    d.tau = cfg.number_or("dqn", "tau", d.tau);
    d.hard_sync_period =
        static_cast<int>(cfg.number_or("dqn", "hard_sync_period", 0));
    d.batch_size = static_cast<int>(cfg.number_or("dqn", "batch_size", d.batch_size));
    d.lr = cfg.number_or("dqn", "lr", d.lr);
    d.warmup_steps =
        static_cast<int>(cfg.number_or("dqn", "warmup_steps", d.warmup_steps));
    d.train_every = static_cast<int>(cfg.number_or("dqn", "train_every", d.train_every));
    d.buffer_capacity = static_cast<std::size_t>(
        cfg.number_or("dqn", "buffer_capacity", static_cast<double>(d.buffer_capacity)));
    d.epsilon.start = cfg.number_or("dqn", "epsilon_start", d.epsilon.start);
    d.epsilon.end = cfg.number_or("dqn", "epsilon_end", d.epsilon.end);
    d.epsilon.fraction = cfg.number_or("dqn", "epsilon_fraction", d.epsilon.fraction);
  }

  if (exp.agent == "dqn+rnd") {
    RndConfig r;
    const std::string variant = cfg.text_or("rnd", "variant", "shifted");
    if (variant == "vanilla")
      r.variant = RndVariant::Vanilla;
    else if (variant == "shifted")
      r.variant = RndVariant::Shifted;
    else
      throw std::runtime_error("config: [rnd] variant must be vanilla or shifted");
    r.shift = cfg.number_or("rnd", "shift", r.shift);
    r.hidden = to_int_list(
        cfg.number_list_or("rnd", "hidden", {512.0, 512.0, 512.0}), "[rnd] hidden");
    r.output_dim = static_cast<int>(cfg.number_or("rnd", "output_dim", r.output_dim));
    r.lr = cfg.number_or("rnd", "lr", r.lr);
    const std::string mode = cfg.text_or("rnd", "mode", "state");
    if (mode == "state")
      r.mode = RndInputMode::State;
    else if (mode == "state_action")
      r.mode = RndInputMode::StateAction;
    else
      throw std::runtime_error("config: [rnd] mode must be state or state_action");
    exp.dqn.rnd = r;
  }

  if (exp.agent == "rrs") {
    RrsConfig& r = exp.rrs;
    r.shifts = cfg.number_list_or("rrs", "critic_shifts", r.shifts);
    r.critic_hidden = to_int_list(
        cfg.number_list_or("rrs", "critic_hidden", {64.0, 64.0}), "[rrs] critic_hidden");
    r.policy_hidden = to_int_list(
        cfg.number_list_or("rrs", "policy_hidden", {64.0, 64.0}), "[rrs] policy_hidden");
    r.gamma = cfg.number_or("rrs", "gamma", r.gamma);
    r.tau = cfg.number_or("rrs", "tau", r.tau);
    r.critic_lr = cfg.number_or("rrs", "critic_lr", r.critic_lr);
    r.actor_lr = cfg.number_or("rrs", "actor_lr", r.actor_lr);
    r.noise_sigma = cfg.number_or("rrs", "noise_sigma", r.noise_sigma);
    r.batch_size = static_cast<int>(cfg.number_or("rrs", "batch_size", r.batch_size));
    r.warmup_steps =
        static_cast<int>(cfg.number_or("rrs", "warmup_steps", r.warmup_steps));
    r.buffer_capacity = static_cast<std::size_t>(cfg.number_or(
        "rrs", "buffer_capacity", static_cast<double>(r.buffer_capacity)));
    r.eval_every = static_cast<int>(cfg.number_or("rrs", "eval_every", r.eval_every));
    r.eval_rollouts =
        static_cast<int>(cfg.number_or("rrs", "eval_rollouts", r.eval_rollouts));
  }

  if (exp.agent == "offline") {
    OfflineExperiment& o = exp.offline;
    o.dataset_path = cfg.text("offline", "dataset");
    o.train.hidden = to_int_list(
        cfg.number_list_or("offline", "hidden", {64.0, 64.0}), "[offline] hidden");
    o.train.gamma = cfg.number_or("offline", "gamma", o.train.gamma);
    o.train.epochs = static_cast<int>(cfg.number_or("offline", "epochs", o.train.epochs));
    o.train.batch_size =
        static_cast<int>(cfg.number_or("offline", "batch_size", o.train.batch_size));
    o.train.lr = cfg.number_or("offline", "lr", o.train.lr);
    o.train.target_sync_steps = static_cast<int>(
        cfg.number_or("offline", "target_sync_steps", o.train.target_sync_steps));
    o.tau_bcq = cfg.number_or("offline", "tau_bcq", o.tau_bcq);
    o.behavior.epochs =
        static_cast<int>(cfg.number_or("offline", "behavior_epochs", o.behavior.epochs));
    o.behavior.hidden = to_int_list(
        cfg.number_list_or("offline", "behavior_hidden", {64.0, 64.0}),
        "[offline] behavior_hidden");
    o.eval_rollouts =
        static_cast<int>(cfg.number_or("offline", "eval_rollouts", o.eval_rollouts));
    o.gap_rollouts =
        static_cast<int>(cfg.number_or("offline", "gap_rollouts", o.gap_rollouts));
  }

  return exp;
}

std::string shift_label(double b) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", b);
  std::string label(buf);
  for (char& c : label) {
    if (c == '-') c = 'm';
    if (c == '.') c = 'p';
  }
  return label;
}

std::string curve_csv(const RunRecord& record) {
  std::string out = "run_id,seed,env,algo,shift_b,step,episode,metric,value\n";
  const std::string prefix = record.run_id + "," + std::to_string(record.seed) + "," +
                             record.env + "," + record.algo + "," +
                             fmt17(record.shift_b) + ",";
  for (const CurvePoint& p : record.points) {
    out += prefix + std::to_string(p.step) + "," + std::to_string(p.episode) + "," +
           p.metric + "," + fmt17(p.value) + "\n";
  }
  return out;
}

std::vector<RunRecord> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve csv " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty curve csv " + path);
  if (line != "run_id,seed,env,algo,shift_b,step,episode,metric,value")
    throw std::runtime_error("unexpected csv header in " + path);
  std::vector<RunRecord> records;
  std::map<std::string, std::size_t> index;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    if (cells.size() != 9)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 9 csv cells");
    const std::string& run_id = cells[0];
    auto it = index.find(run_id);
    if (it == index.end()) {
      RunRecord rec;
      rec.run_id = run_id;
      rec.seed = std::stoull(cells[1]);
      rec.env = cells[2];
      rec.algo = cells[3];
      rec.shift_b = std::stod(cells[4]);
      index[run_id] = records.size();
      records.push_back(std::move(rec));
      it = index.find(run_id);
    }
    CurvePoint p;
    p.step = std::stoll(cells[5]);
    p.episode = std::stoi(cells[6]);
    p.metric = cells[7];
    p.value = std::stod(cells[8]);
    records[it->second].points.push_back(std::move(p));
  }
  return records;
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

int harness_thread_cap() {
  if (const char* env = std::getenv("SHIFTLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int threads = std::min(n, harness_thread_cap());
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

RunRecord run_single(const ExperimentConfig& cfg, double shift_b, std::uint64_t seed) {
  RunRecord rec;
  rec.run_id = cfg.id + "_b" + shift_label(shift_b) + "_s" + std::to_string(seed);
  rec.seed = seed;
  rec.env = cfg.env.tag();
  rec.algo = cfg.agent;
  rec.shift_b = shift_b;

  if (cfg.agent == "tabular") {
    if (cfg.env.kind != "grid_maze")
      throw std::runtime_error("tabular agent requires a grid_maze env");
    GridMaze env(cfg.env.maze);
    TabularConfig t = cfg.tabular;
    t.shift = make_shift(shift_b);
    t.episodes = cfg.episodes;
    rec.points = run_tabular(env, t, seed);
  } else if (cfg.agent == "dqn" || cfg.agent == "dqn+rnd") {
    auto env = cfg.env.make_discrete();
    DqnConfig d = cfg.dqn;
    d.shift = make_shift(shift_b);
    rec.points = run_dqn(*env, d, seed, cfg.episodes);
  } else if (cfg.agent == "rrs") {
    if (cfg.env.kind != "point_mass")
      throw std::runtime_error("rrs agent requires a point_mass env");
    PointMass env(cfg.env.point_mass);
    RrsConfig r = cfg.rrs;
    for (double& b : r.shifts) b += shift_b;  // swept center offset
    rec.points = run_rrs(env, r, seed, cfg.episodes);
  } else if (cfg.agent == "offline") {
    const OfflineDataset ds = load_dataset(cfg.offline.dataset_path);
    OfflineConfig train = cfg.offline.train;
    train.epochs = cfg.episodes;  // the run budget is the epoch count
    const BehaviorModel behavior =
        train_behavior_model(ds, cfg.offline.behavior, cfg.offline.tau_bcq, seed);
    const ShiftSpec shift = make_shift(shift_b);
    OfflineResult result = train_offline(ds, shift, behavior, train, seed);
    rec.points = std::move(result.curve);
    auto env = cfg.env.make_discrete();
    const GapReport gap =
        evaluate_gap(*env, result.q, behavior, ds, shift, train.gamma,
                     cfg.offline.gap_rollouts, splitmix64(seed + 101));
    const double eval_return =
        evaluate_policy_return(*env, result.q, behavior, train.gamma,
                               cfg.offline.eval_rollouts, splitmix64(seed + 202));
    const long long end_step = rec.points.empty() ? 0 : rec.points.back().step;
    rec.points.push_back({end_step, train.epochs, "gap", gap.gap});
    rec.points.push_back({end_step, train.epochs, "estimate", gap.estimate});
    rec.points.push_back({end_step, train.epochs, "mc_return", gap.mc_return});
    rec.points.push_back({end_step, train.epochs, "eval_return", eval_return});
  } else {
    throw std::runtime_error("unknown agent kind '" + cfg.agent + "'");
  }
  return rec;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(cfg.out_dir);

  struct Job {
    double shift = 0.0;
    std::uint64_t seed = 0;
    std::string run_id;
    std::string csv_path;
    bool ok = false;
    std::string error;
  };
  std::vector<Job> jobs;
  for (double shift : cfg.shifts)
    for (std::uint64_t seed : cfg.seeds) {
      Job j;
      j.shift = shift;
      j.seed = seed;
      j.run_id = cfg.id + "_b" + shift_label(shift) + "_s" + std::to_string(seed);
      j.csv_path = cfg.out_dir + "/" + j.run_id + ".csv";
      jobs.push_back(std::move(j));
    }

  std::mutex log_mutex;
  parallel_for(static_cast<int>(jobs.size()), [&](int i) {
    Job& job = jobs[i];
    try {
      const RunRecord rec = run_single(cfg, job.shift, job.seed);
      write_file_atomically(job.csv_path, curve_csv(rec));
      job.ok = true;
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "run " << job.run_id << " done\n";
    } catch (const std::exception& e) {
      job.error = e.what();
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "run " << job.run_id << " FAILED: " << e.what() << "\n";
    }
  });

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::ordered_json manifest;
  manifest["id"] = cfg.id;
  manifest["config_hash"] = hex64(config_hash(cfg.raw));
  manifest["wall_clock_sec"] = wall;
  manifest["runs"] = nlohmann::ordered_json::array();
  bool any_failed = false;
  for (const Job& job : jobs) {
    nlohmann::ordered_json entry;
    entry["run_id"] = job.run_id;
    entry["seed"] = job.seed;
    entry["shift_b"] = job.shift;
    entry["csv"] = job.csv_path;
    entry["ok"] = job.ok;
    if (!job.ok) {
      entry["error"] = job.error;
      any_failed = true;
    }
    manifest["runs"].push_back(entry);
  }
  write_file_atomically(cfg.out_dir + "/" + cfg.id + "_manifest.json",
                        manifest.dump(2) + "\n");
  return any_failed ? 2 : 0;
}

}  // namespace shiftlab
