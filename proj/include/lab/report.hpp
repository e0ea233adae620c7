#pragma once
// Result export and the command layer behind the CLI.
//
// Every run writes a directory named run-<hash> under the requested output
// root, where <hash> fingerprints the manifest (config snapshot, seeds,
// policy list, version, timing flag). The directory holds manifest.json,
// results.csv (one row per seed x slot, fixed column order), and
// summary.json (per-run aggregates plus pooled mean/stddev per policy).
// Re-running an identical manifest reproduces results.csv byte for byte;
// enabling timing populates decision_ms and is fingerprinted separately.

#include <cstdint>
#include <string>
#include <vector>

#include "lab/harness.hpp"
#include "lab/types.hpp"

namespace lab::report {

inline constexpr const char* kArtifactVersion = "lab 1.0.0";

struct Manifest {
  SystemConfig cfg;  // finalized
  std::vector<std::string> policies;
  std::vector<std::uint64_t> seeds;
  bool timing = false;
  std::string version = kArtifactVersion;
};

// Canonical text form (hash input) and its FNV-1a fingerprint (16 hex).
std::string manifest_text(const Manifest& m);
std::string manifest_hash(const Manifest& m);

// Shortest round-trip decimal form, locale-independent.
std::string format_double(double v);

std::string csv_header(int n_devices);

struct RunPaths {
  std::string dir, csv, summary, manifest;
};

RunPaths write_run(const std::string& out_root, const Manifest& m,
                   const std::vector<harness::RunResult>& runs);

// --- commands ---------------------------------------------------------------

struct RunRequest {
  std::string config_text;    // raw config-file contents; empty = defaults
  std::string config_origin = "<defaults>";
  std::vector<std::string> policies;
  std::vector<std::uint64_t> seeds;
  std::string out_root;
  bool timing = false;
  // Optional one-key sweep: one run directory per value.
  std::string sweep_key;
  std::vector<std::string> sweep_values;
};

// Executes the runs and writes one directory per sweep value (exactly one
// when no sweep is requested).
std::vector<RunPaths> cmd_run(const RunRequest& req);

// Reads run directories under results_dir (or results_dir itself) and
// emits one tidy CSV (x,series,y,stderr) for the named figure:
//   tradeoff   needs a latency-weight sweep over {0, 0.5, 1, 2, 3}
//   pathloss   needs a pathloss-exponent sweep (>= 2 values)
//   scale      needs an n_devices sweep over {1,...,7}
//   optgap     needs one run holding ideal plus at least one other policy
//   candidates needs one run holding the lab policy
// Throws with the list of missing runs when a sweep is incomplete, and
// refuses to mix runs whose configs differ beyond the swept key.
void cmd_figures(const std::string& results_dir, const std::string& figure,
                 const std::string& out_path);

// Solves one allocation instance file and writes shares, per-device upload
// times, duals, objective, and the independent-oracle delta.
void cmd_bandwidth(const std::string& instance_path, const std::string& out_path);

// Fast in-process oracle checks; prints one line per suite, returns the
// number of failures.
int cmd_selftest();

}  // namespace lab::report
