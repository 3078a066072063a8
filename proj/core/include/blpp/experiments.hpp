#pragma once

#include <blpp/check.hpp>
#include <blpp/grid.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace blpp {

// Resolved run configuration. Zero-valued numeric fields mean "use the
// experiment's default"; the runner echoes the fully resolved config to disk.
struct ExperimentConfig {
  std::string name;
  double t_min = 0.0, t_max = 0.0, step = 0.0;
  int levels = 0;
  double theta = 0.0;
  double lambda = 0.0;
  int replicas = 0;
  uint64_t seed = 1;
  std::string out_dir;
  int parallel = 0;  // worker threads; 0 = hardware concurrency
  std::map<std::string, std::string> extra;
};

// One row per replica (or per batch, where the experiment aggregates).
struct ReplicaTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ExperimentOutput {
  ExperimentConfig resolved;
  std::vector<CheckReport> checks;
  ReplicaTable table;
};

// The experiment registry, in the canonical listing order.
const std::vector<std::string>& experiment_names();

// Closest registered name (for usage errors), by edit distance.
std::string suggest_experiment(const std::string& name);

// Runs one experiment; throws std::invalid_argument on unknown names or
// invalid configuration. Deterministic: identical config (any parallel
// degree) yields identical output, because replica streams derive from
// (seed, replica index) and results merge in index order.
ExperimentOutput run_experiment(const ExperimentConfig& config);

// run_experiment + artifacts in config.out_dir (default "out/<name>"):
// config.echo, replicas.csv, summary.csv, report.txt. Returns 0 when every
// check passed, 1 otherwise.
int run_and_write(const ExperimentConfig& config);

// Deterministic replica fan-out: body(rep) runs for rep in [0, replicas)
// across `threads` workers pulling an atomic index; callers store results in
// preallocated per-replica slots so output never depends on scheduling.
void replica_fan_out(int replicas, int threads, const std::function<void(int)>& body);

// Serialization helpers shared by the runner and the tests.
void write_replicas_csv(const std::string& path, const ReplicaTable& table);
void write_summary_csv(const std::string& path, const std::vector<CheckReport>& checks);
void write_report_txt(const std::string& path, const std::vector<CheckReport>& checks);
void write_config_echo(const std::string& path, const ExperimentConfig& config);

}  // namespace blpp
