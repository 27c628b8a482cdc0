// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "isocollapse/harness.hpp"

namespace isocollapse::cli {

enum class ExperimentKind {
    born,
    correlation,
    chsh,
    param_independence,
    foliation,
    filtering_check,
    martingale,
    measure_change,
    convergence,
    charfn,
};

std::string_view to_string(ExperimentKind kind) noexcept;

/// Bad or missing configuration; `key()` names the offending setting.
class UsageError : public std::invalid_argument {
public:
    UsageError(std::string key, const std::string& message)
        : std::invalid_argument(message), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// `--help` was given; what() holds the usage text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::born;
    ExperimentConfig experiment;
    std::vector<double> angles; ///< empty: the experiment's default settings
    std::optional<std::string> out_path;
    std::optional<std::string> dump_trials_path;
    bool text = false;
};

/// Raw key/value settings prior to validation.
using Settings = std::map<std::string, std::string>;

/// Flat JSON object of scalars; nested values and unknown keys are rejected.
Settings load_config_file(const std::string& path);
Settings parse_config_json(const nlohmann::json& doc);

/// Applies defaults, then `file`, then `flags`; validates every value.
RunConfig resolve(const Settings& file, const Settings& flags);

/// Parses argv (with an optional --config file). Throws UsageError or HelpRequested.
RunConfig parse_config(int argc, const char* const* argv);

/// Fully resolved settings that determine the results (no output paths or thread count).
nlohmann::json echo(const RunConfig& config);

/// Runs the experiment; 0 on success or inconclusive, 1 on a failed band.
int run(const RunConfig& config, std::ostream& out);

} // namespace isocollapse::cli
