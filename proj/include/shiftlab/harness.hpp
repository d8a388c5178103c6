#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/config.hpp"
#include "shiftlab/curve.hpp"
#include "shiftlab/dqn.hpp"
#include "shiftlab/environments.hpp"
#include "shiftlab/offline.hpp"
#include "shiftlab/rrs.hpp"
#include "shiftlab/tabular.hpp"

namespace shiftlab {

// --- experiment configuration -------------------------------------------

struct EnvConfig {
  std::string kind;  // grid_maze | mountain_car | point_mass
  GridMazeSpec maze;
  MountainCarSpec mountain_car;
  PointMassSpec point_mass;

  std::string tag() const;
  std::unique_ptr<DiscreteEnv> make_discrete() const;  // throws for point_mass
};

struct OfflineExperiment {
  std::string dataset_path;
  OfflineConfig train;
  BehaviorTrainConfig behavior;
  double tau_bcq = 0.3;
  int eval_rollouts = 64;
  int gap_rollouts = 256;
};

struct ExperimentConfig {
  std::string id;
  std::string agent;  // tabular | dqn | dqn+rnd | rrs | offline
  std::vector<std::uint64_t> seeds;
  std::vector<double> shifts;
  int episodes = 100;
  std::string out_dir;
  EnvConfig env;
  TabularConfig tabular;
  DqnConfig dqn;
  RrsConfig rrs;
  OfflineExperiment offline;
  Config raw;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_from_config(const Config& cfg);

// --- run records and CSV ------------------------------------------------

struct RunRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string env;
  std::string algo;
  double shift_b = 0.0;
  std::vector<CurvePoint> points;
};

// fixed schema: run_id,seed,env,algo,shift_b,step,episode,metric,value
std::string curve_csv(const RunRecord& record);
std::vector<RunRecord> read_curve_csv(const std::string& path);

// temp-file-plus-rename write
void write_file_atomically(const std::string& path, const std::string& contents);

std::string shift_label(double b);

// Executes |seeds| x |shifts| runs, one CSV per run plus a manifest JSON.
// Parallelism is capped by SHIFTLAB_THREADS. Returns 0 on success, 2 when
// any run failed.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Runs a single (shift, seed) cell of an experiment.
RunRecord run_single(const ExperimentConfig& cfg, double shift_b, std::uint64_t seed);

// --- aggregation ----------------------------------------------------------

struct AggregateRow {
  std::string metric;
  long long x = 0;  // episode
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  long n = 0;
};

// Linear-interpolation quantile between order statistics (type 7).
double quantile(std::vector<double> values, double p);

// Per (metric, episode): median and quartiles across runs. All runs must
// share the same episode grid per metric.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(const std::string& path);

// --- plotting -------------------------------------------------------------

struct PlotSeries {
  std::string label;
  std::vector<AggregateRow> rows;  // one metric only
};

struct PlotOptions {
  std::string metric;
  std::string title;
  int width = 640;
  int height = 420;
};

// Self-contained SVG: axes with ticks, one median path and one translucent
// quantile band per series, legend. Byte-deterministic.
std::string render_plot_svg(const std::vector<PlotSeries>& series,
                            const PlotOptions& options);

// --- verification ---------------------------------------------------------

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double max_discrepancy = 0.0;
  std::string detail;
};

// Full property suite. debias_perturbation exists for fault-injection tests:
// it shifts the debias round-trip check's expected value.
std::vector<VerifyCheck> run_verification(double debias_perturbation = 0.0);
bool all_passed(const std::vector<VerifyCheck>& checks);
void print_verification(const std::vector<VerifyCheck>& checks, std::ostream& out);

// --- misc -----------------------------------------------------------------

int harness_thread_cap();

// Runs fn(i) for i in [0, n) on up to harness_thread_cap() threads.
void parallel_for(int n, const std::function<void(int)>& fn);

std::string hex64(std::uint64_t value);

}  // namespace shiftlab
