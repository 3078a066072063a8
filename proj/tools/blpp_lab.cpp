// blpp-lab: run one registered experiment and write its artifacts
// (config.echo, replicas.csv, summary.csv, report.txt). config.echo is itself
// a valid --config file, so any run can be replayed verbatim:
//   blpp-lab run --config out/shape/config.echo
// Exit codes: 0 all checks passed, 1 some check failed, 2 usage/config error.

#include "CLI11.hpp"

#include <blpp/experiments.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

struct CliVals {
  double t_min = 0.0, t_max = 0.0, step = 0.0, theta = 0.0, lambda = 0.0;
  int levels = 0, replicas = 0, parallel = 0;
  uint64_t seed = 0;
  std::string out_dir, config_path;
  std::vector<std::string> sets;
};

void add_run_options(CLI::App* sub, CliVals& v) {
  sub->add_option("--t-min", v.t_min, "window start (experiment default when omitted)");
  sub->add_option("--t-max", v.t_max, "window end");
  sub->add_option("--step", v.step, "grid step");
  sub->add_option("--levels,--n", v.levels, "line count / recursion depth");
  sub->add_option("--theta,--t", v.theta, "direction parameter");
  sub->add_option("--lambda", v.lambda, "drift / rate parameter");
  sub->add_option("--replicas", v.replicas, "Monte Carlo replicas");
  sub->add_option("--seed", v.seed, "root RNG seed (default: BLPP_SEED env, then 1)");
  sub->add_option("--out", v.out_dir, "artifact directory (default out/<experiment>)");
  sub->add_option("--parallel", v.parallel, "worker threads (0 = hardware concurrency)");
  sub->add_option("--config", v.config_path, "key=value config file (config.echo format)")
      ->check(CLI::ExistingFile);
  sub->add_option("--set", v.sets, "experiment-specific option KEY=VALUE (repeatable)");
}

std::string describe(const std::string& name) {
  static const std::map<std::string, std::string> d = {
      {"shape", "growth constant: mean of L((0,0)->(n,n theta))/n vs 2 sqrt(theta)"},
      {"lpp-bruteforce", "dynamic program vs exhaustive enumeration, bit equality"},
      {"queue-invert", "forward queue maps round-trip through reverse reconstruction"},
      {"pitman", "pathwise reflection identity + last-passage crossing inequalities"},
      {"busemann-marginals", "one-point laws of the recursion sampler (exp v, normal h)"},
      {"busemann-crosscheck", "additivity, reverse duality, monotonicity, limit moments"},
      {"dual-field", "dual lines as independent driftless Brownian motions"},
      {"geodesic-direction", "geodesic slope concentration + pathwise identities"},
      {"geodesic-crossing", "slot-exact crossing implications vs dual paths"},
      {"coalescence", "coalescence frequency of geodesics from separated starts"},
      {"near-ties", "argmax uniqueness scan on the geodesic integrand"},
      {"midpoint", "midpoint-hitting probability decay as endpoints recede"},
      {"burke", "independence of stationary blocks + deep-iterate marginals"},
      {"sandwich", "finite-depth bracketing of the stationary quantities"},
      {"dist-argmax", "argmax tail of the drifted-walk supremum vs closed form"},
      {"dist-increment-cdf", "mixed increment law (atom at zero) vs closed-form CDF"},
      {"exp-sup", "exponential law of the drifted-walk supremum"},
  };
  const auto it = d.find(name);
  return it == d.end() ? std::string("registered experiment") : it->second;
}

long long parse_int(const std::string& key, const std::string& text) {
  size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size()) throw std::runtime_error("config key '" + key + "': not an integer: " + text);
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size()) throw std::runtime_error("config key '" + key + "': not a number: " + text);
  return v;
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Applies one key=value pair; unknown keys become experiment extras.
void apply_kv(blpp::ExperimentConfig& c, bool& seed_given, const std::string& k,
              const std::string& v) {
  if (k == "experiment") {
    c.name = v;
  } else if (k == "t_min") {
    c.t_min = parse_double(k, v);
  } else if (k == "t_max") {
    c.t_max = parse_double(k, v);
  } else if (k == "step") {
    c.step = parse_double(k, v);
  } else if (k == "levels") {
    c.levels = static_cast<int>(parse_int(k, v));
  } else if (k == "theta") {
    c.theta = parse_double(k, v);
  } else if (k == "lambda") {
    c.lambda = parse_double(k, v);
  } else if (k == "replicas") {
    c.replicas = static_cast<int>(parse_int(k, v));
  } else if (k == "seed") {
    c.seed = static_cast<uint64_t>(parse_int(k, v));
    seed_given = true;
  } else if (k == "parallel") {
    c.parallel = static_cast<int>(parse_int(k, v));
  } else if (k == "out_dir") {
    c.out_dir = v;
  } else {
    c.extra[k] = v;
  }
}

void load_config_file(blpp::ExperimentConfig& c, bool& seed_given, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    apply_kv(c, seed_given, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical experiments for semi-discrete Brownian last-passage percolation"};
  app.require_subcommand(1);

  CliVals v;
  CLI::App* list_cmd = app.add_subcommand("list", "print registered experiment names");
  CLI::App* run_cmd =
      app.add_subcommand("run", "run an experiment (positional name or --config file)");
  std::string run_name;
  run_cmd->add_option("experiment", run_name, "experiment name");
  add_run_options(run_cmd, v);
  std::vector<CLI::App*> exp_cmds;
  for (const std::string& name : blpp::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    add_run_options(sub, v);
    exp_cmds.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    if (argc > 1 && argv[1][0] != '-') {
      const std::string tok = argv[1];
      bool known = tok == "list" || tok == "run";
      for (const std::string& name : blpp::experiment_names()) known = known || name == tok;
      if (!known) {
        std::cerr << "unknown experiment '" << tok << "' (closest: '"
                  << blpp::suggest_experiment(tok) << "'; see `blpp-lab list`)\n";
        return 2;
      }
    }
    app.exit(e);
    return 2;
  }

  if (list_cmd->parsed()) {
    for (const std::string& name : blpp::experiment_names()) {
      std::cout << name << "\n";
    }
    return 0;
  }

  CLI::App* sub = run_cmd->parsed() ? run_cmd : nullptr;
  std::string cli_name = run_cmd->parsed() ? run_name : "";
  for (CLI::App* s : exp_cmds) {
    if (s->parsed()) {
      sub = s;
      cli_name = s->get_name();
    }
  }

  blpp::ExperimentConfig c;
  bool seed_given = false;
  try {
    if (sub->count("--config") > 0) load_config_file(c, seed_given, v.config_path);
    if (sub->count("--t-min") > 0) c.t_min = v.t_min;
    if (sub->count("--t-max") > 0) c.t_max = v.t_max;
    if (sub->count("--step") > 0) c.step = v.step;
    if (sub->count("--levels") > 0) c.levels = v.levels;
    if (sub->count("--theta") > 0) c.theta = v.theta;
    if (sub->count("--lambda") > 0) c.lambda = v.lambda;
    if (sub->count("--replicas") > 0) c.replicas = v.replicas;
    if (sub->count("--parallel") > 0) c.parallel = v.parallel;
    if (sub->count("--out") > 0) c.out_dir = v.out_dir;
    if (sub->count("--seed") > 0) {
      c.seed = v.seed;
      seed_given = true;
    }
    for (const std::string& kv : v.sets) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw std::runtime_error("--set expects KEY=VALUE, got: " + kv);
      }
      c.extra[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
    if (!cli_name.empty()) c.name = cli_name;
    if (c.name.empty()) {
      throw std::runtime_error("run: the config file must contain experiment=<name>");
    }
    if (!seed_given) {
      if (const char* env = std::getenv("BLPP_SEED")) {
        c.seed = static_cast<uint64_t>(parse_int("BLPP_SEED", env));
      }
    }
    return blpp::run_and_write(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
