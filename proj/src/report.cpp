#include "lab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "lab/actor.hpp"
#include "lab/bandwidth.hpp"
#include "lab/config_io.hpp"
#include "lab/env.hpp"
#include "lab/gp.hpp"
#include "lab/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace lab::report {

namespace {

constexpr int kOptgapWindow = 500;
constexpr int kCandidateBucket = 100;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double csv_field_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::runtime_error("bad numeric CSV field: '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// --- summary ------------------------------------------------------------

struct MetricStats {
  double mean = 0.0, stddev = 0.0;
};

MetricStats stats(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return s;
}

ordered_json summary_json(const Manifest& m,
                          const std::vector<harness::RunResult>& runs) {
  ordered_json per_run = ordered_json::array();
  std::map<std::string, std::map<std::string, std::vector<double>>> pools;
  for (const auto& r : runs) {
    const double med_ms = m.timing ? r.agg.decision_seconds_median * 1e3 : 0.0;
    per_run.push_back(ordered_json{{"policy", r.policy},
                                   {"seed", r.seed},
                                   {"alpha_bar", r.agg.alpha_bar},
                                   {"tau_bar", r.agg.tau_bar},
                                   {"conf_bar", r.agg.conf_bar},
                                   {"utility_bar", r.agg.utility_bar},
                                   {"k_mean", r.agg.k_mean},
                                   {"decision_ms_median", med_ms}});
    auto& p = pools[r.policy];
    p["alpha_bar"].push_back(r.agg.alpha_bar);
    p["tau_bar"].push_back(r.agg.tau_bar);
    p["conf_bar"].push_back(r.agg.conf_bar);
    p["utility_bar"].push_back(r.agg.utility_bar);
    p["k_mean"].push_back(r.agg.k_mean);
    p["decision_ms_median"].push_back(med_ms);
  }
  ordered_json pooled;
  for (const auto& [pol, metrics] : pools) {
    ordered_json entry;
    for (const auto& [name, xs] : metrics) {
      const MetricStats s = stats(xs);
      entry[name] = ordered_json{{"mean", s.mean}, {"stddev", s.stddev}};
    }
    pooled[pol] = entry;
  }
  return ordered_json{{"version", m.version},
                      {"manifest_hash", manifest_hash(m)},
                      {"policies", m.policies},
                      {"seeds", m.seeds},
                      {"horizon", m.cfg.horizon},
                      {"n_devices", m.cfg.n_devices},
                      {"per_run", per_run},
                      {"pooled", pooled}};
}

std::string csv_body(const Manifest& m,
                     const std::vector<harness::RunResult>& runs) {
  std::string out = csv_header(m.cfg.n_devices);
  out += '\n';
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.slots.size(); ++i) {
      const auto& s = r.slots[i];
      const auto& rec = s.rec;
      out += std::to_string(r.seed);
      out += ',';
      out += std::to_string(i + 1);
      out += ',';
      out += r.policy;
      auto add = [&out](const std::string& v) {
        out += ',';
        out += v;
      };
      for (int lvl : rec.action) add(std::to_string(lvl));
      for (double v : rec.share) add(format_double(v));
      for (double v : rec.alpha) add(format_double(v));
      for (double v : rec.conf) add(format_double(v));
      for (double v : rec.tau_degrade) add(format_double(v));
      for (double v : rec.tau_tx) add(format_double(v));
      for (double v : rec.tau_edge) add(format_double(v));
      for (double v : rec.util) add(format_double(v));
      add(format_double(rec.total_utility));
      add(std::to_string(s.k_evaluated));
      add(std::to_string(s.chosen_rank));
      add(m.timing ? format_double(s.decision_seconds * 1e3) : "0");
      out += '\n';
    }
  }
  return out;
}

// --- figure scaffolding ------------------------------------------------

struct RunDir {
  std::string dir;
  std::string hash;
  std::map<std::string, std::string> config;
  std::vector<std::string> policies;
  std::vector<std::uint64_t> seeds;
  json summary;
};

RunDir load_run_dir(const fs::path& dir) {
  RunDir rd;
  rd.dir = dir.string();
  const json man = json::parse(read_text_file((dir / "manifest.json").string()));
  rd.hash = man.at("hash").get<std::string>();
  for (const auto& [k, v] : man.at("config").items())
    rd.config[k] = v.get<std::string>();
  for (const auto& p : man.at("policies"))
    rd.policies.push_back(p.get<std::string>());
  for (const auto& s : man.at("seeds")) rd.seeds.push_back(s.get<std::uint64_t>());
  rd.summary = json::parse(read_text_file((dir / "summary.json").string()));
  return rd;
}

std::vector<RunDir> scan_results(const std::string& results_dir) {
  const fs::path root(results_dir);
  if (!fs::exists(root))
    throw std::runtime_error("results directory does not exist: " + results_dir);
  std::vector<fs::path> dirs;
  if (fs::exists(root / "manifest.json")) {
    dirs.push_back(root);
  } else {
    for (const auto& e : fs::directory_iterator(root))
      if (e.is_directory() && fs::exists(e.path() / "manifest.json"))
        dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty())
    throw std::runtime_error("no run directories (manifest.json) under " +
                             results_dir);
  std::vector<RunDir> out;
  for (const auto& d : dirs) out.push_back(load_run_dir(d));
  return out;
}

// Per-device keys broadcast a single value to n_devices entries, so a
// homogeneous list collapses to one token before runs are compared — a
// device-count sweep must not read "1200" vs "1200 1200" as a config change.
std::string comparable_value(const std::string& key, const std::string& value) {
  static const std::set<std::string> kPerDevice = {
      "radio.tx_power_w", "latency.latency_weight", "latency.degrade_px_per_s",
      "frames.native_w", "frames.native_h"};
  if (!kPerDevice.count(key)) return value;
  std::istringstream in(value);
  std::string first, tok;
  if (!(in >> first)) return value;
  while (in >> tok)
    if (tok != first) return value;
  return first;
}

// All dirs must agree on every config key except `swept_key`, and on seeds
// and policies; otherwise results from different setups would be mixed.
void check_compatible(const std::vector<RunDir>& dirs,
                      const std::string& swept_key) {
  const RunDir& ref = dirs.front();
  for (const RunDir& rd : dirs) {
    if (rd.seeds != ref.seeds || rd.policies != ref.policies)
      throw std::runtime_error(
          "mixing results from different configs: " + rd.dir + " and " +
          ref.dir + " differ in seeds or policies");
    for (const auto& [k, v] : ref.config) {
      if (k == swept_key) continue;
      const auto it = rd.config.find(k);
      if (it == rd.config.end() ||
          comparable_value(k, it->second) != comparable_value(k, v))
        throw std::runtime_error("mixing results from different configs: " +
                                 rd.dir + " differs from " + ref.dir + " at " +
                                 k);
    }
  }
}

// Per-policy, per-seed values of one summary metric.
std::map<std::string, std::vector<double>> metric_by_policy(
    const RunDir& rd, const std::string& metric) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& entry : rd.summary.at("per_run"))
    out[entry.at("policy").get<std::string>()].push_back(
        entry.at(metric).get<double>());
  return out;
}

struct FigureRow {
  double x = 0.0;
  std::string series;
  double y = 0.0;
  double stderr_ = 0.0;
};

void write_figure(const std::string& out_path,
                  const std::vector<std::string>& hashes,
                  std::vector<FigureRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const FigureRow& a, const FigureRow& b) {
                     if (a.x != b.x) return a.x < b.x;
                     return a.series < b.series;
                   });
  std::string out = "# manifest";
  for (const auto& h : hashes) {
    out += ' ';
    out += h;
  }
  out += "\nx,series,y,stderr\n";
  for (const auto& r : rows) {
    out += format_double(r.x);
    out += ',';
    out += r.series;
    out += ',';
    out += format_double(r.y);
    out += ',';
    out += format_double(r.stderr_);
    out += '\n';
  }
  write_text_file(out_path, out);
}

double first_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  double v = 0.0;
  if (!(in >> v))
    throw std::runtime_error("cannot parse sweep value for " + key + ": '" +
                             value + "'");
  // A heterogeneous per-device list has no single sweep coordinate.
  double rest = 0.0;
  while (in >> rest)
    if (rest != v)
      throw std::runtime_error(key + " is heterogeneous ('" + value +
                               "'); sweep figures need a single value");
  return v;
}

void append_metric_rows(std::vector<FigureRow>& rows, const RunDir& rd, double x,
                        const std::string& metric, const std::string& suffix) {
  for (const auto& [pol, xs] : metric_by_policy(rd, metric)) {
    const MetricStats s = stats(xs);
    FigureRow row;
    row.x = x;
    row.series = pol + "." + suffix;
    row.y = s.mean;
    row.stderr_ = xs.size() > 1
                      ? s.stddev / std::sqrt(static_cast<double>(xs.size()))
                      : 0.0;
    rows.push_back(row);
  }
}

// Sweep figure over one config key with a required (or minimum) value set.
void figure_sweep(const std::vector<RunDir>& all, const std::string& out_path,
                  const std::string& figure, const std::string& config_key,
                  const std::vector<double>& required,
                  const std::vector<std::pair<std::string, std::string>>& metrics) {
  std::map<double, const RunDir*> by_value;
  for (const auto& rd : all) {
    const auto it = rd.config.find(config_key);
    if (it == rd.config.end()) continue;
    const double v = first_number(config_key, it->second);
    const auto [pos, fresh] = by_value.emplace(v, &rd);
    if (!fresh)
      throw std::runtime_error(figure + ": duplicate runs for " + config_key +
                               " = " + format_double(v) + " (" +
                               pos->second->dir + " and " + rd.dir + ")");
  }
  if (!required.empty()) {
    std::string missing;
    for (double v : required)
      if (!by_value.count(v)) missing += (missing.empty() ? "" : ", ") +
                                         format_double(v);
    if (!missing.empty())
      throw std::runtime_error(figure + ": missing runs for " + config_key +
                               " = " + missing);
  } else if (by_value.size() < 2) {
    throw std::runtime_error(figure + ": needs at least two distinct values of " +
                             config_key + ", found " +
                             std::to_string(by_value.size()));
  }

  std::vector<RunDir> chosen;
  for (const auto& [v, rd] : by_value) chosen.push_back(*rd);
  check_compatible(chosen, config_key);

  std::vector<FigureRow> rows;
  std::vector<std::string> hashes;
  for (const auto& [v, rd] : by_value) {
    hashes.push_back(rd->hash);
    for (const auto& [metric, suffix] : metrics)
      append_metric_rows(rows, *rd, v, metric, suffix);
  }
  write_figure(out_path, hashes, std::move(rows));
}

// One run dir that contains all `needed` policies; errors name the gap.
const RunDir& single_dir_with(const std::vector<RunDir>& all,
                              const std::vector<std::string>& needed,
                              const std::string& figure) {
  const RunDir* found = nullptr;
  for (const auto& rd : all) {
    bool ok = true;
    for (const auto& p : needed)
      ok = ok && std::find(rd.policies.begin(), rd.policies.end(), p) !=
                     rd.policies.end();
    if (!ok) continue;
    if (found != nullptr)
      throw std::runtime_error(figure + ": ambiguous, both " + found->dir +
                               " and " + rd.dir + " qualify; point at one run");
    found = &rd;
  }
  if (found == nullptr) {
    std::string req;
    for (const auto& p : needed) req += (req.empty() ? "" : ", ") + p;
    throw std::runtime_error(figure + ": no run directory holds policies " + req);
  }
  return *found;
}

// Slot-level columns needed by the time-resolved figures.
struct SlotRows {
  // (policy, seed) -> per-slot values indexed by t-1
  std::map<std::pair<std::string, std::uint64_t>, std::vector<double>> utility;
  std::map<std::pair<std::string, std::uint64_t>, std::vector<double>> k_eval;
  int horizon = 0;
};

SlotRows read_slot_rows(const RunDir& rd) {
  const std::string text = read_text_file(rd.dir + "/results.csv");
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty results.csv in " + rd.dir);
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("results.csv in " + rd.dir + " lacks column " +
                               name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_seed = col("seed"), c_t = col("t"), c_pol = col("policy"),
                    c_u = col("U"), c_k = col("K_t");
  SlotRows rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const auto key = std::make_pair(
        f[c_pol], static_cast<std::uint64_t>(csv_field_double(f[c_seed])));
    const int t = static_cast<int>(csv_field_double(f[c_t]));
    auto& u = rows.utility[key];
    auto& k = rows.k_eval[key];
    if (static_cast<int>(u.size()) < t) {
      u.resize(t, 0.0);
      k.resize(t, 0.0);
    }
    u[t - 1] = csv_field_double(f[c_u]);
    k[t - 1] = csv_field_double(f[c_k]);
    rows.horizon = std::max(rows.horizon, t);
  }
  return rows;
}

void figure_optgap(const std::vector<RunDir>& all, const std::string& out_path) {
  const RunDir& rd = single_dir_with(all, {"ideal"}, "optgap");
  if (rd.policies.size() < 2)
    throw std::runtime_error("optgap: run " + rd.dir +
                             " holds only ideal; need a policy to compare");
  const SlotRows rows = read_slot_rows(rd);
  std::vector<FigureRow> out;
  for (const auto& pol : rd.policies) {
    if (pol == "ideal") continue;
    for (int start = 0; start < rows.horizon; start += kOptgapWindow) {
      const int end = std::min(rows.horizon, start + kOptgapWindow);
      std::vector<double> per_seed;
      for (std::uint64_t seed : rd.seeds) {
        const auto& u_pol = rows.utility.at({pol, seed});
        const auto& u_opt = rows.utility.at({"ideal", seed});
        double acc = 0.0;
        for (int t = start; t < end; ++t) acc += u_opt[t] - u_pol[t];
        per_seed.push_back(acc / static_cast<double>(end - start));
      }
      const MetricStats s = stats(per_seed);
      FigureRow row;
      row.x = end;
      row.series = pol;
      row.y = s.mean;
      row.stderr_ =
          per_seed.size() > 1
              ? s.stddev / std::sqrt(static_cast<double>(per_seed.size()))
              : 0.0;
      out.push_back(row);
    }
  }
  write_figure(out_path, {rd.hash}, std::move(out));
}

void figure_candidates(const std::vector<RunDir>& all,
                       const std::string& out_path) {
  const RunDir& rd = single_dir_with(all, {"lab"}, "candidates");
  const SlotRows rows = read_slot_rows(rd);
  std::vector<FigureRow> out;
  for (int start = 0; start < rows.horizon; start += kCandidateBucket) {
    const int end = std::min(rows.horizon, start + kCandidateBucket);
    std::vector<double> per_seed;
    for (std::uint64_t seed : rd.seeds) {
      const auto& k = rows.k_eval.at({"lab", seed});
      double acc = 0.0;
      for (int t = start; t < end; ++t) acc += k[t];
      per_seed.push_back(acc / static_cast<double>(end - start));
    }
    const MetricStats s = stats(per_seed);
    FigureRow row;
    row.x = end;
    row.series = "lab";
    row.y = s.mean;
    row.stderr_ = per_seed.size() > 1
                      ? s.stddev / std::sqrt(static_cast<double>(per_seed.size()))
                      : 0.0;
    out.push_back(row);
  }
  write_figure(out_path, {rd.hash}, std::move(out));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_header(int n_devices) {
  std::string h = "seed,t,policy";
  auto block = [&](const std::string& p) {
    for (int i = 1; i <= n_devices; ++i) h += "," + p + "_" + std::to_string(i);
  };
  block("a");
  block("b");
  block("alpha");
  block("c");
  block("tau_d");
  block("tau_o");
  block("tau_c");
  block("u");
  h += ",U,K_t,k_star,decision_ms";
  return h;
}

std::string manifest_text(const Manifest& m) {
  std::string out;
  out += "version = " + m.version + "\n";
  out += "policies =";
  for (const auto& p : m.policies) out += " " + p;
  out += "\nseeds =";
  for (auto s : m.seeds) out += " " + std::to_string(s);
  out += "\ntiming = ";
  out += m.timing ? '1' : '0';
  out += '\n';
  for (const auto& [k, v] : config::serialize_config(m.cfg))
    out += k + " = " + v + "\n";
  return out;
}

std::string manifest_hash(const Manifest& m) {
  return hex16(fnv1a64(manifest_text(m)));
}

RunPaths write_run(const std::string& out_root, const Manifest& m,
                   const std::vector<harness::RunResult>& runs) {
  const std::string hash = manifest_hash(m);
  const fs::path dir = fs::path(out_root) / ("run-" + hash);
  fs::create_directories(dir);

  RunPaths paths;
  paths.dir = dir.string();
  paths.csv = (dir / "results.csv").string();
  paths.summary = (dir / "summary.json").string();
  paths.manifest = (dir / "manifest.json").string();

  ordered_json man{{"version", m.version},
                   {"hash", hash},
                   {"timing", m.timing},
                   {"policies", m.policies},
                   {"seeds", m.seeds},
                   {"outputs", {"results.csv", "summary.json"}}};
  ordered_json cfgj;
  for (const auto& [k, v] : config::serialize_config(m.cfg)) cfgj[k] = v;
  man["config"] = cfgj;
  write_text_file(paths.manifest, man.dump(2) + "\n");
  write_text_file(paths.csv, csv_body(m, runs));
  write_text_file(paths.summary, summary_json(m, runs).dump(2) + "\n");
  return paths;
}

std::vector<RunPaths> cmd_run(const RunRequest& req) {
  if (req.policies.empty())
    throw std::invalid_argument("cmd_run: no policies requested");
  if (req.seeds.empty()) throw std::invalid_argument("cmd_run: no seeds given");
  if (req.out_root.empty())
    throw std::invalid_argument("cmd_run: no output directory");
  if (req.sweep_key.empty() != req.sweep_values.empty())
    throw std::invalid_argument(
        "cmd_run: sweep key and sweep values must come together");

  std::vector<std::string> values = req.sweep_values;
  if (values.empty()) values.push_back("");

  std::vector<RunPaths> out;
  for (const std::string& value : values) {
    SystemConfig cfg =
        config::parse_config_raw(req.config_text, req.config_origin);
    if (!req.sweep_key.empty())
      config::apply_override(cfg, req.sweep_key, value);
    cfg.finalize();
    cfg.validate();

    const auto runs = harness::run_bench(cfg, req.policies, req.seeds);
    Manifest m;
    m.cfg = cfg;
    m.policies = req.policies;
    m.seeds = req.seeds;
    m.timing = req.timing;
    out.push_back(write_run(req.out_root, m, runs));
  }
  return out;
}

void cmd_figures(const std::string& results_dir, const std::string& figure,
                 const std::string& out_path) {
  const auto all = scan_results(results_dir);
  if (figure == "tradeoff") {
    figure_sweep(all, out_path, "tradeoff", "latency.latency_weight",
                 {0.0, 0.5, 1.0, 2.0, 3.0},
                 {{"tau_bar", "tau"}, {"alpha_bar", "alpha"}});
  } else if (figure == "pathloss") {
    figure_sweep(all, out_path, "pathloss", "radio.pathloss_exponent", {},
                 {{"utility_bar", "utility"},
                  {"tau_bar", "tau"},
                  {"alpha_bar", "alpha"}});
  } else if (figure == "scale") {
    figure_sweep(all, out_path, "scale", "system.n_devices",
                 {1, 2, 3, 4, 5, 6, 7},
                 {{"k_mean", "k_mean"}, {"decision_ms_median", "decision_ms"}});
  } else if (figure == "optgap") {
    figure_optgap(all, out_path);
  } else if (figure == "candidates") {
    figure_candidates(all, out_path);
  } else {
    throw std::invalid_argument(
        "unknown figure: " + figure +
        " (expected tradeoff, optgap, pathloss, scale, or candidates)");
  }
}

void cmd_bandwidth(const std::string& instance_path,
                   const std::string& out_path) {
  const std::string text = read_text_file(instance_path);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bw::AllocationProblem prob;
  bool have_w = false, have_noise = false, in_rows = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    const std::string at = instance_path + ":" + std::to_string(lineno);
    if (!in_rows) {
      if (line == "d,h,p,w") {
        in_rows = true;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(at + ": expected 'key = value' or the row "
                                      "header 'd,h,p,w'");
      std::istringstream kv(line.substr(eq + 1));
      double v = 0.0;
      if (!(kv >> v)) throw std::runtime_error(at + ": cannot parse value");
      std::string key = line.substr(0, eq);
      while (!key.empty() && key.back() == ' ') key.pop_back();
      if (key == "bandwidth_hz") {
        prob.bandwidth_hz = v;
        have_w = true;
      } else if (key == "noise_psd_w") {
        prob.noise_psd_w = v;
        have_noise = true;
      } else {
        throw std::runtime_error(at + ": unknown key '" + key + "'");
      }
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 4)
      throw std::runtime_error(at + ": expected 4 fields d,h,p,w, got " +
                               std::to_string(f.size()));
    try {
      prob.data_bits.push_back(csv_field_double(f[0]));
      prob.gain.push_back(csv_field_double(f[1]));
      prob.power_w.push_back(csv_field_double(f[2]));
      prob.weight.push_back(csv_field_double(f[3]));
    } catch (const std::exception& e) {
      throw std::runtime_error(at + ": " + e.what());
    }
  }
  if (!have_w || !have_noise)
    throw std::runtime_error(instance_path +
                             ": needs bandwidth_hz and noise_psd_w lines");
  if (prob.data_bits.empty())
    throw std::runtime_error(instance_path + ": no device rows after d,h,p,w");

  const bw::Allocation sol = bw::solve_allocation(prob);
  const bw::Allocation ref = bw::oracle_allocation(prob);
  double max_delta = 0.0;
  for (std::size_t i = 0; i < sol.share.size(); ++i)
    max_delta = std::max(max_delta, std::abs(sol.share[i] - ref.share[i]));

  std::string out = "device,b,tau_o,phi\n";
  for (std::size_t i = 0; i < sol.share.size(); ++i) {
    out += std::to_string(i) + ',' + format_double(sol.share[i]) + ',' +
           format_double(sol.tx_time[i]) + ',' + format_double(sol.phi[i]) +
           '\n';
  }
  out += "eta," + format_double(sol.eta) + '\n';
  out += "objective," + format_double(sol.objective) + '\n';
  out += "oracle_max_delta_b," + format_double(max_delta) + '\n';
  if (out_path.empty())
    std::fputs(out.c_str(), stdout);
  else
    write_text_file(out_path, out);
}

int cmd_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name,
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++failures;
  };

  {  // Lambert W identity on a coarse grid
    double worst = 0.0;
    const double lo = -1.0 / std::exp(1.0) + 1e-12;
    for (int i = 0; i <= 20000; ++i) {
      const double x = lo + (1e6 - lo) * (static_cast<double>(i) / 20000.0);
      const double w = bw::lambert_w0(x);
      const double resid = std::abs(w * std::exp(w) - x) /
                           std::max(1e-300, std::abs(x));
      worst = std::max(worst, resid);
    }
    report("lambert-identity", worst <= 1e-12,
           "max relative residual " + format_double(worst));
  }

  {  // allocation KKT + oracle agreement
    rng::Stream g(20260817);
    double worst_kkt = 0.0, worst_db = 0.0;
    for (int inst = 0; inst < 40; ++inst) {
      const int n = 1 + static_cast<int>(g.below(6));
      bw::AllocationProblem prob;
      prob.bandwidth_hz = 5e6;
      prob.noise_psd_w = 3.9810717055349694e-21;
      for (int i = 0; i < n; ++i) {
        prob.gain.push_back(std::pow(10.0, -11.0 + 4.0 * g.u01()));
        prob.power_w.push_back(0.05 + 0.15 * g.u01());
        prob.weight.push_back(0.2 + 2.8 * g.u01());
        prob.data_bits.push_back(std::pow(10.0, 5.0 + 3.0 * g.u01()));
      }
      const auto sol = bw::solve_allocation(prob);
      double sum = 0.0;
      for (double b : sol.share) sum += b;
      worst_kkt = std::max(worst_kkt, std::abs(sum - 1.0));
      for (int i = 0; i < n; ++i) {
        const double back =
            bw::b_from_duals(sol.eta, sol.phi[i], prob.gain[i], prob.power_w[i],
                             prob.bandwidth_hz, prob.noise_psd_w);
        worst_kkt = std::max(worst_kkt, std::abs(back - sol.share[i]));
      }
      if (inst % 4 == 0) {
        const auto ref = bw::oracle_allocation(prob);
        for (int i = 0; i < n; ++i)
          worst_db =
              std::max(worst_db, std::abs(ref.share[i] - sol.share[i]));
      }
    }
    report("allocation-kkt-oracle", worst_kkt <= 1e-9 && worst_db <= 1e-6,
           "kkt " + format_double(worst_kkt) + ", oracle delta " +
               format_double(worst_db));
  }

  {  // GP gradients and batch-vs-single posterior
    rng::Stream g(77);
    double worst_fd = 0.0, worst_batch = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      gp::Cache cache(32);
      const int n = 8 + static_cast<int>(g.below(12));
      for (int i = 0; i < n; ++i) {
        gp::Entry e;
        e.h = {g.normal(), g.normal()};
        e.a = {static_cast<int>(g.below(3)), static_cast<int>(g.below(3))};
        e.t = i + 1;
        e.y = g.normal();
        cache.append(e);
      }
      gp::KernelParams p = gp::initial_params(cache, 2);
      p.length = {0.7, 1.3};
      p.recency = 0.05;
      const auto lg = gp::log_marginal_with_grad(cache, p);
      Eigen::VectorXd theta = gp::params_to_theta(p);
      for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double eps = 1e-6;
        Eigen::VectorXd tp = theta, tm = theta;
        tp(j) += eps;
        tm(j) -= eps;
        const double fp =
            gp::log_marginal(cache, gp::theta_to_params(tp, 2));
        const double fm =
            gp::log_marginal(cache, gp::theta_to_params(tm, 2));
        const double fd = (fp - fm) / (2.0 * eps);
        const double denom =
            std::max({1.0, std::abs(fd), std::abs(lg.grad(j))});
        worst_fd = std::max(worst_fd, std::abs(fd - lg.grad(j)) / denom);
      }
      const auto model = gp::Model::fit(cache, p);
      std::vector<DegradationAction> cands;
      for (int c = 0; c < 5; ++c)
        cands.push_back(
            {static_cast<int>(g.below(3)), static_cast<int>(g.below(3))});
      std::vector<gp::Posterior> batch;
      model.posterior_batch({0.1, -0.4}, cands, n + 1, batch);
      for (int c = 0; c < 5; ++c) {
        const auto single = model.posterior({0.1, -0.4}, cands[c], n + 1);
        worst_batch = std::max({worst_batch,
                                std::abs(single.mean - batch[c].mean),
                                std::abs(single.var - batch[c].var)});
      }
    }
    report("gp-gradient-batch", worst_fd <= 1e-4 && worst_batch <= 1e-12,
           "fd " + format_double(worst_fd) + ", batch " +
               format_double(worst_batch));
  }

  {  // actor gradient vs finite differences on a toy net
    rng::Stream init(4), g(5);
    actor::PreferenceNet net(6, {4}, 4, init);
    std::vector<std::vector<double>> xs, ts;
    for (int b = 0; b < 3; ++b) {
      std::vector<double> x(6), t(4, 0.0);
      for (double& v : x) v = g.normal();
      t[static_cast<int>(g.below(4))] = 1.0;
      xs.push_back(x);
      ts.push_back(t);
    }
    const Eigen::VectorXd an = net.gradient(xs, ts);
    Eigen::VectorXd theta = net.params_flat();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double eps = 1e-6;
      Eigen::VectorXd tp = theta, tm = theta;
      tp(i) += eps;
      tm(i) -= eps;
      net.set_params_flat(tp);
      const double fp = net.loss(xs, ts);
      net.set_params_flat(tm);
      const double fm = net.loss(xs, ts);
      net.set_params_flat(theta);
      const double fd = (fp - fm) / (2.0 * eps);
      worst = std::max(worst,
                       std::abs(fd - an(i)) /
                           std::max({1.0, std::abs(fd), std::abs(an(i))}));
    }
    report("actor-gradient", worst <= 1e-4, "fd " + format_double(worst));
  }

  {  // environment determinism and pure evaluation
    SystemConfig cfg;
    cfg.horizon = 30;
    cfg.finalize();
    env::Environment e1(cfg, 99), e2(cfg, 99);
    bool ok = true;
    for (int t = 1; t <= 30 && ok; ++t) {
      e1.begin_slot(t);
      e2.begin_slot(t);
      ok = ok && e1.gains() == e2.gains();
      const DegradationAction a(cfg.n_devices, t % cfg.n_levels);
      const auto shares = std::vector<double>(
          cfg.n_devices, 1.0 / static_cast<double>(cfg.n_devices));
      const auto r1 = e1.evaluate(a, shares);
      const auto probe = e1.evaluate(DegradationAction(cfg.n_devices, 0), shares);
      const auto r2 = e1.evaluate(a, shares);
      ok = ok && r1.total_utility == r2.total_utility &&
           r1.alpha == r2.alpha && probe.t == r1.t;
    }
    report("env-determinism", ok, "");
  }

  return failures;
}

}  // namespace lab::report
