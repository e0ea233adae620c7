// Command-line front end: run single-policy experiments, paired benchmarks,
// figure extraction, the bandwidth solver, and the oracle self-test suite.
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lab/config_io.hpp"
#include "lab/policies.hpp"
#include "lab/report.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::uint64_t>& seed,
                                       const std::string& seeds) {
  std::vector<std::uint64_t> out = seed;
  for (const std::string& tok : split_list(seeds))
    out.push_back(std::stoull(tok));
  if (out.empty()) out.push_back(1);
  return out;
}

lab::report::RunRequest base_request(const std::string& config_path,
                                     const std::string& out_dir, bool timing) {
  lab::report::RunRequest req;
  if (!config_path.empty()) {
    req.config_text = read_file(config_path);
    req.config_origin = config_path;
  }
  req.out_root = out_dir;
  req.timing = timing;
  return req;
}

void print_paths(const std::vector<lab::report::RunPaths>& paths) {
  for (const auto& p : paths) std::printf("wrote %s\n", p.dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge-offloading controller testbed"};
  app.set_version_flag("--version", lab::report::kArtifactVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = "results", policy = "lab";
  std::string policies_csv, seeds_csv, sweep, results_dir, figure, out_path;
  std::string instance_path;
  std::vector<std::uint64_t> seed_flags;
  bool timing = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    cmd->add_option("--seed", seed_flags, "seed (repeatable)");
    cmd->add_option("--seeds", seeds_csv, "comma-separated seed list");
    cmd->add_option("--out", out_dir, "output root directory");
    cmd->add_flag("--timing", timing,
                  "record wall-clock decision times (runs stop being "
                  "byte-reproducible)");
  };

  CLI::App* run = app.add_subcommand("run", "run one policy, write a run dir");
  add_common(run);
  run->add_option("--policy", policy, "policy token")
      ->check(CLI::IsMember(lab::policy::policy_tokens()));

  CLI::App* bench = app.add_subcommand(
      "bench", "run several policies on common random numbers");
  add_common(bench);
  bench->add_option("--policies", policies_csv,
                    "comma-separated policy tokens (default: all)");
  bench->add_option("--sweep", sweep,
                    "config sweep, e.g. latency.latency_weight=0,0.5,1,2,3");

  CLI::App* figs = app.add_subcommand("figures", "extract tidy figure data");
  figs->add_option("results_dir", results_dir,
                   "a run directory or a directory of run-* directories")
      ->required();
  figs->add_option("--figure", figure,
                   "tradeoff | optgap | pathloss | scale | candidates")
      ->required();
  figs->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* bw = app.add_subcommand("bandwidth", "solve one allocation instance");
  bw->add_option("instance", instance_path,
                 "instance file: key = value lines, then d,h,p,w rows")
      ->required();
  bw->add_option("--out", out_path, "output CSV path (default: stdout)");

  app.add_subcommand("selftest", "run the oracle self-test suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto req = base_request(config_path, out_dir, timing);
      req.policies = {policy};
      req.seeds = parse_seeds(seed_flags, seeds_csv);
      print_paths(lab::report::cmd_run(req));
    } else if (bench->parsed()) {
      auto req = base_request(config_path, out_dir, timing);
      req.policies = policies_csv.empty() ? lab::policy::policy_tokens()
                                          : split_list(policies_csv);
      req.seeds = parse_seeds(seed_flags, seeds_csv);
      if (!sweep.empty()) {
        const auto eq = sweep.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("--sweep wants key=v1,v2,...");
        req.sweep_key = sweep.substr(0, eq);
        req.sweep_values = split_list(sweep.substr(eq + 1));
        if (req.sweep_values.empty())
          throw std::runtime_error("--sweep has no values");
      }
      print_paths(lab::report::cmd_run(req));
    } else if (figs->parsed()) {
      lab::report::cmd_figures(results_dir, figure, out_path);
      std::printf("wrote %s\n", out_path.c_str());
    } else if (bw->parsed()) {
      lab::report::cmd_bandwidth(instance_path, out_path);
    } else {  // selftest
      const int fails = lab::report::cmd_selftest();
      return fails == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
