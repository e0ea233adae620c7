#pragma once
// Flat key-value configuration files. One `key = value` pair per line,
// `#` starts a comment, blank lines ignored. Keys are documented field
// names, optionally prefixed by their section ("controller.ucb_beta" or
// bare "ucb_beta"). Per-device fields take one value (broadcast) or one
// per device. Unknown keys and malformed values are errors that name the
// offending key. Unset keys keep the built-in defaults.
//
// Convenience keys: tx_power_dbm and noise_psd_dbm_hz convert from dBm
// (per device) and dBm/Hz into watts.

#include <string>
#include <utility>
#include <vector>

#include "lab/types.hpp"

namespace lab::config {

// Applies one key/value pair onto cfg. Throws std::invalid_argument with
// the key path on unknown keys or unparseable values.
void apply_override(SystemConfig& cfg, const std::string& key,
                    const std::string& value);

// Parses a file of overrides onto the defaults, then finalizes and
// validates. Missing file throws std::runtime_error. An empty path means
// "defaults only".
SystemConfig load_config(const std::string& path);

// Parses the text form (same grammar as the file contents).
SystemConfig parse_config(const std::string& text, const std::string& origin);

// Same, but leaves the config unfinalized so callers can layer more
// overrides (sweeps) before finalize()/validate().
SystemConfig parse_config_raw(const std::string& text, const std::string& origin);

// Canonical full listing, one "section.key = value" pair per line in a
// fixed order, doubles at full precision. Input to the manifest hash and
// to figure-compatibility checks.
std::vector<std::pair<std::string, std::string>> serialize_config(
    const SystemConfig& cfg);

std::string acquisition_name(Acquisition a);
Acquisition acquisition_from_name(const std::string& s);

double dbm_to_watts(double dbm);

}  // namespace lab::config
