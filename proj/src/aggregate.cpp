#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "shiftlab/harness.hpp"

namespace shiftlab {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no input runs");

  // per run: metric -> ordered (episode, value)
  using Series = std::vector<std::pair<long long, double>>;
  std::vector<std::map<std::string, Series>> per_run(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (const CurvePoint& p : runs[r].points)
      per_run[r][p.metric].push_back({p.episode, p.value});

  // metrics present in every run; metrics carried by only some runs are
  // diagnostics and get dropped
  std::set<std::string> metrics;
  for (const auto& [metric, series] : per_run[0]) metrics.insert(metric);
  for (std::size_t r = 1; r < runs.size(); ++r) {
    std::set<std::string> keep;
    for (const std::string& m : metrics)
      if (per_run[r].count(m)) keep.insert(m);
    metrics = std::move(keep);
  }
  if (metrics.empty())
    throw std::runtime_error("aggregate: input runs share no metric");

  std::vector<AggregateRow> rows;
  for (const std::string& metric : metrics) {
    const Series& reference = per_run[0].at(metric);
    for (std::size_t r = 1; r < runs.size(); ++r) {
      const Series& other = per_run[r].at(metric);
      bool aligned = other.size() == reference.size();
      for (std::size_t i = 0; aligned && i < other.size(); ++i)
        aligned = other[i].first == reference[i].first;
      if (!aligned)
        throw std::runtime_error("aggregate: misaligned x-grid for metric '" + metric +
                                 "' between runs '" + runs[0].run_id + "' and '" +
                                 runs[r].run_id + "'");
    }
    for (std::size_t i = 0; i < reference.size(); ++i) {
      std::vector<double> values;
      values.reserve(runs.size());
      for (std::size_t r = 0; r < runs.size(); ++r)
        values.push_back(per_run[r].at(metric)[i].second);
      AggregateRow row;
      row.metric = metric;
      row.x = reference[i].first;
      row.median = quantile(values, 0.5);
      row.q25 = quantile(values, 0.25);
      row.q75 = quantile(values, 0.75);
      row.n = static_cast<long>(values.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "metric,episode,median,q25,q75,n\n";
  for (const AggregateRow& row : rows) {
    out += row.metric + "," + std::to_string(row.x) + "," + fmt17(row.median) + "," +
           fmt17(row.q25) + "," + fmt17(row.q75) + "," + std::to_string(row.n) + "\n";
  }
  return out;
}

std::vector<AggregateRow> read_aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open aggregate csv " + path);
  std::string line;
  if (!std::getline(in, line) || line != "metric,episode,median,q25,q75,n")
    throw std::runtime_error("unexpected aggregate csv header in " + path);
  std::vector<AggregateRow> rows;
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
    if (cells.size() != 6)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 6 csv cells");
    AggregateRow row;
    row.metric = cells[0];
    row.x = std::stoll(cells[1]);
    row.median = std::stod(cells[2]);
    row.q25 = std::stod(cells[3]);
    row.q75 = std::stod(cells[4]);
    row.n = std::stol(cells[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace shiftlab
