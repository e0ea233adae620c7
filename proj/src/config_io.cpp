#include "lab/config_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace lab::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& key, const std::string& tok) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": cannot parse '" + tok + "' as a number");
  }
}

long long parse_int(const std::string& key, const std::string& tok) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": cannot parse '" + tok +
                                "' as an integer");
  }
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& tok : split_ws(v)) out.push_back(parse_double(key, tok));
  if (out.empty()) throw std::invalid_argument(key + ": empty value");
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& tok : split_ws(v))
    out.push_back(static_cast<int>(parse_int(key, tok)));
  if (out.empty()) throw std::invalid_argument(key + ": empty value");
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  const char* section;
  std::function<void(SystemConfig&, const std::string& key, const std::string&)>
      set;
  std::function<std::string(const SystemConfig&)> get;  // null: write-only alias
};

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    if constexpr (std::is_same_v<T, double>)
      s += fmt_double(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

// Field table in canonical (serialization) order.
const std::vector<std::pair<std::string, Field>>& field_table() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add_int = [&](const char* sec, const char* name, int SystemConfig::*m) {
      t.push_back({name, Field{sec,
                               [m](SystemConfig& c, const std::string& k,
                                   const std::string& v) {
                                 c.*m = static_cast<int>(parse_int(k, v));
                               },
                               [m](const SystemConfig& c) {
                                 return std::to_string(c.*m);
                               }}});
    };
    auto add_ll = [&](const char* sec, const char* name,
                      long long SystemConfig::*m) {
      t.push_back({name, Field{sec,
                               [m](SystemConfig& c, const std::string& k,
                                   const std::string& v) {
                                 c.*m = parse_int(k, v);
                               },
                               [m](const SystemConfig& c) {
                                 return std::to_string(c.*m);
                               }}});
    };
    auto add_dbl = [&](const char* sec, const char* name,
                       double SystemConfig::*m) {
      t.push_back({name, Field{sec,
                               [m](SystemConfig& c, const std::string& k,
                                   const std::string& v) {
                                 c.*m = parse_double(k, v);
                               },
                               [m](const SystemConfig& c) {
                                 return fmt_double(c.*m);
                               }}});
    };
    auto add_dvec = [&](const char* sec, const char* name,
                        std::vector<double> SystemConfig::*m) {
      t.push_back({name, Field{sec,
                               [m](SystemConfig& c, const std::string& k,
                                   const std::string& v) {
                                 c.*m = parse_doubles(k, v);
                               },
                               [m](const SystemConfig& c) {
                                 return join(c.*m);
                               }}});
    };
    auto add_ivec = [&](const char* sec, const char* name,
                        std::vector<int> SystemConfig::*m) {
      t.push_back({name, Field{sec,
                               [m](SystemConfig& c, const std::string& k,
                                   const std::string& v) {
                                 c.*m = parse_ints(k, v);
                               },
                               [m](const SystemConfig& c) {
                                 return join(c.*m);
                               }}});
    };

    add_int("system", "n_devices", &SystemConfig::n_devices);
    add_int("system", "n_levels", &SystemConfig::n_levels);
    add_int("system", "horizon", &SystemConfig::horizon);
    add_dbl("system", "iou_threshold", &SystemConfig::iou_threshold);
    add_dbl("system", "alpha_max", &SystemConfig::alpha_max);

    add_dbl("radio", "bandwidth_hz", &SystemConfig::bandwidth_hz);
    add_dvec("radio", "tx_power_w", &SystemConfig::tx_power_w);
    add_dbl("radio", "noise_psd_w", &SystemConfig::noise_psd_w);
    add_dbl("radio", "pathloss_exponent", &SystemConfig::pathloss_exponent);
    add_dbl("radio", "antenna_gain", &SystemConfig::antenna_gain);
    add_dbl("radio", "carrier_hz", &SystemConfig::carrier_hz);

    add_dvec("latency", "latency_weight", &SystemConfig::latency_weight);
    add_dvec("latency", "degrade_px_per_s", &SystemConfig::degrade_px_per_s);
    add_dbl("latency", "edge_px_per_s", &SystemConfig::edge_px_per_s);
    add_dbl("latency", "edge_base_s", &SystemConfig::edge_base_s);

    add_ivec("frames", "native_w", &SystemConfig::native_w);
    add_ivec("frames", "native_h", &SystemConfig::native_h);

    add_dbl("track", "track_w_m", &SystemConfig::track_w_m);
    add_dbl("track", "track_h_m", &SystemConfig::track_h_m);
    add_dbl("track", "step_m", &SystemConfig::step_m);

    add_dbl("content", "content_mean", &SystemConfig::content_mean);
    add_dbl("content", "content_coeff", &SystemConfig::content_coeff);
    add_dbl("content", "content_sd", &SystemConfig::content_sd);
    add_dbl("content", "content_init_lo", &SystemConfig::content_init_lo);
    add_dbl("content", "content_init_hi", &SystemConfig::content_init_hi);
    add_dbl("content", "oracle_gamma", &SystemConfig::oracle_gamma);
    add_dbl("content", "oracle_noise_frac", &SystemConfig::oracle_noise_frac);
    add_dbl("content", "conf_noise_sd", &SystemConfig::conf_noise_sd);

    add_int("controller", "history_len", &SystemConfig::history_len);
    add_int("controller", "replay_capacity", &SystemConfig::replay_capacity);
    add_int("controller", "batch_size", &SystemConfig::batch_size);
    add_int("controller", "train_every", &SystemConfig::train_every);
    add_int("controller", "refit_every", &SystemConfig::refit_every);
    add_int("controller", "k_adapt_every", &SystemConfig::k_adapt_every);
    add_int("controller", "bo_capacity", &SystemConfig::bo_capacity);
    add_dbl("controller", "learning_rate", &SystemConfig::learning_rate);
    add_dbl("controller", "ucb_beta", &SystemConfig::ucb_beta);
    add_int("controller", "k_init", &SystemConfig::k_init);
    add_ivec("controller", "hidden", &SystemConfig::hidden);
    t.push_back({"acquisition",
                 Field{"controller",
                       [](SystemConfig& c, const std::string& k,
                          const std::string& v) {
                         try {
                           c.acquisition = acquisition_from_name(trim(v));
                         } catch (const std::exception&) {
                           throw std::invalid_argument(
                               k + ": expected ucb, ei, or pi, got '" + v + "'");
                         }
                       },
                       [](const SystemConfig& c) {
                         return acquisition_name(c.acquisition);
                       }}});
    add_ll("controller", "enum_cap", &SystemConfig::enum_cap);
    add_dbl("controller", "grad_clip", &SystemConfig::grad_clip);
    add_int("controller", "refit_max_iter", &SystemConfig::refit_max_iter);

    // Unit-conversion aliases (write-only, absent from serialization).
    t.push_back({"tx_power_dbm",
                 Field{"radio",
                       [](SystemConfig& c, const std::string& k,
                          const std::string& v) {
                         c.tx_power_w.clear();
                         for (double dbm : parse_doubles(k, v))
                           c.tx_power_w.push_back(dbm_to_watts(dbm));
                       },
                       nullptr}});
    t.push_back({"noise_psd_dbm_hz",
                 Field{"radio",
                       [](SystemConfig& c, const std::string& k,
                          const std::string& v) {
                         c.noise_psd_w = dbm_to_watts(parse_double(k, v));
                       },
                       nullptr}});
    return t;
  }();
  return table;
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

std::string acquisition_name(Acquisition a) {
  switch (a) {
    case Acquisition::kUcb: return "ucb";
    case Acquisition::kEi: return "ei";
    case Acquisition::kPi: return "pi";
  }
  return "ucb";
}

Acquisition acquisition_from_name(const std::string& s) {
  if (s == "ucb") return Acquisition::kUcb;
  if (s == "ei") return Acquisition::kEi;
  if (s == "pi") return Acquisition::kPi;
  throw std::invalid_argument("unknown acquisition: " + s);
}

void apply_override(SystemConfig& cfg, const std::string& key,
                    const std::string& value) {
  std::string section, name = key;
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    section = key.substr(0, dot);
    name = key.substr(dot + 1);
  }
  for (const auto& [fname, field] : field_table()) {
    if (fname != name) continue;
    if (!section.empty() && section != field.section)
      throw std::invalid_argument("unknown key: " + key + " ('" + name +
                                  "' belongs to section '" + field.section +
                                  "')");
    field.set(cfg, key, trim(value));
    return;
  }
  throw std::invalid_argument("unknown key: " + key);
}

SystemConfig parse_config_raw(const std::string& text, const std::string& origin) {
  SystemConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": empty key");
    try {
      apply_override(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

SystemConfig parse_config(const std::string& text, const std::string& origin) {
  SystemConfig cfg = parse_config_raw(text, origin);
  cfg.finalize();
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  if (path.empty()) {
    SystemConfig cfg;
    cfg.finalize();
    cfg.validate();
    return cfg;
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::vector<std::pair<std::string, std::string>> serialize_config(
    const SystemConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : field_table()) {
    if (!field.get) continue;
    out.emplace_back(std::string(field.section) + "." + name, field.get(cfg));
  }
  return out;
}

}  // namespace lab::config
