// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "isocollapse/analytics.hpp"
#include "isocollapse/report.hpp"

namespace isocollapse::cli {

namespace {

using nlohmann::json;

constexpr ExperimentKind kKinds[] = {
    ExperimentKind::born,           ExperimentKind::correlation,     ExperimentKind::chsh,
    ExperimentKind::param_independence, ExperimentKind::foliation, ExperimentKind::filtering_check,
    ExperimentKind::martingale,     ExperimentKind::measure_change,  ExperimentKind::convergence,
    ExperimentKind::charfn,
};

const char* const kKeys[] = {"experiment", "theta",   "lambda", "volume", "dstep",
                             "trials",     "seed",    "ordering", "threads", "angles",
                             "out",        "dump-trials", "format"};

bool known_key(const std::string& key) {
    for (const char* k : kKeys) {
        if (key == k) return true;
    }
    return false;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw UsageError(key, "malformed number for '" + key + "': '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw UsageError(key, "malformed integer for '" + key + "': '" + text + "'");
    }
    return v;
}

ExperimentKind parse_kind(const std::string& text) {
    for (ExperimentKind k : kKinds) {
        if (text == to_string(k)) return k;
    }
    throw UsageError("experiment", "unknown experiment '" + text + "'");
}

std::vector<double> parse_angles(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const double a = parse_double("angles", item);
        if (!(a >= 0.0 && a <= std::numbers::pi)) {
            throw UsageError("angles", "angles must lie in [0, pi]");
        }
        out.push_back(a);
    }
    if (out.empty()) {
        throw UsageError("angles", "angles list is empty");
    }
    return out;
}

std::string scalar_text(const std::string& key, const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw UsageError(key, "config value for '" + key + "' must be a string or number");
}

} // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
    switch (kind) {
    case ExperimentKind::born: return "born";
    case ExperimentKind::correlation: return "correlation";
    case ExperimentKind::chsh: return "chsh";
    case ExperimentKind::param_independence: return "param-independence";
    case ExperimentKind::foliation: return "foliation";
    case ExperimentKind::filtering_check: return "filtering-check";
    case ExperimentKind::martingale: return "martingale";
    case ExperimentKind::measure_change: return "measure-change";
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::charfn: return "charfn";
    }
    return "unknown";
}

Settings parse_config_json(const json& doc) {
    if (!doc.is_object()) {
        throw UsageError("config", "config file must hold a flat JSON object");
    }
    Settings out;
    for (const auto& [key, v] : doc.items()) {
        if (!known_key(key)) {
            throw UsageError(key, "unknown config key '" + key + "'");
        }
        out[key] = scalar_text(key, v);
    }
    return out;
}

Settings load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("config", "cannot open config file '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config", std::string("config file is not valid JSON: ") + e.what());
    }
    return parse_config_json(doc);
}

RunConfig resolve(const Settings& file, const Settings& flags) {
    Settings merged = file;
    for (const auto& [k, v] : flags) merged[k] = v;
    for (const auto& [k, v] : merged) {
        if (!known_key(k)) throw UsageError(k, "unknown config key '" + k + "'");
    }
    auto require = [&](const char* key) -> const std::string& {
        auto it = merged.find(key);
        if (it == merged.end()) {
            throw UsageError(key, std::string("missing required key '") + key + "'");
        }
        return it->second;
    };

    RunConfig rc;
    rc.kind = parse_kind(require("experiment"));
    ExperimentConfig& e = rc.experiment;
    e.seed = parse_unsigned("seed", require("seed"));
    if (rc.kind == ExperimentKind::martingale || rc.kind == ExperimentKind::measure_change ||
        rc.kind == ExperimentKind::charfn) {
        e.volume = 0.5;
    } else if (rc.kind == ExperimentKind::convergence) {
        e.volume = 1.0;
    }
    if (rc.kind == ExperimentKind::martingale) e.volume = 0.25;
    if (rc.kind == ExperimentKind::filtering_check || rc.kind == ExperimentKind::convergence) {
        e.trials = 1000;
    }

    for (const auto& [key, text] : merged) {
        if (key == "theta") {
            e.theta = parse_double(key, text);
            if (!(e.theta >= 0.0 && e.theta <= std::numbers::pi)) {
                throw UsageError(key, "theta must lie in [0, pi], got " + text);
            }
        } else if (key == "lambda") {
            e.lambda = parse_double(key, text);
            if (!(e.lambda > 0.0)) throw UsageError(key, "lambda must be positive, got " + text);
        } else if (key == "volume") {
            e.volume = parse_double(key, text);
            if (!(e.volume >= 0.0)) throw UsageError(key, "volume must be nonnegative, got " + text);
        } else if (key == "dstep") {
            e.dstep = parse_double(key, text);
            if (!(e.dstep > 0.0)) throw UsageError(key, "dstep must be positive, got " + text);
        } else if (key == "trials") {
            e.trials = parse_unsigned(key, text);
            if (e.trials < 1) throw UsageError(key, "trials must be at least 1");
        } else if (key == "threads") {
            e.threads = static_cast<unsigned>(parse_unsigned(key, text));
            if (e.threads < 1) throw UsageError(key, "threads must be at least 1");
        } else if (key == "ordering") {
            try {
                e.ordering = parse_ordering(text);
            } catch (const std::invalid_argument& ex) {
                throw UsageError(key, ex.what());
            }
        } else if (key == "angles") {
            rc.angles = parse_angles(text);
        } else if (key == "out") {
            rc.out_path = text;
        } else if (key == "dump-trials") {
            rc.dump_trials_path = text;
        } else if (key == "format") {
            if (text != "json" && text != "text") {
                throw UsageError(key, "format must be 'json' or 'text'");
            }
            rc.text = text == "text";
        }
    }
    if (rc.kind == ExperimentKind::chsh && !rc.angles.empty() && rc.angles.size() != 4) {
        throw UsageError("angles", "chsh needs exactly four setting-pair angles");
    }
    return rc;
}

RunConfig parse_config(int argc, const char* const* argv) {
    CLI::App app{"Relativistic state-reduction EPR simulator"};
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> options;
    const std::pair<const char*, const char*> flag_help[] = {
        {"experiment", "born | correlation | chsh | param-independence | foliation | "
                       "filtering-check | martingale | measure-change | convergence | charfn"},
        {"theta", "angle between n1 and n2 in radians"},
        {"lambda", "collapse coupling"},
        {"volume", "lambda^2 Omega per region"},
        {"dstep", "lambda^2 d omega per foliation step"},
        {"trials", "ensemble size"},
        {"seed", "master seed (required)"},
        {"ordering", "region1-first | region2-first | interleaved | random"},
        {"threads", "worker threads"},
        {"angles", "comma-separated setting angles"},
        {"out", "write the JSON report here"},
        {"dump-trials", "write per-trial CSV here"},
        {"format", "json | text on stdout"},
    };
    for (const auto& [key, help] : flag_help) {
        options[key] = app.add_option("--" + std::string(key), raw[key], help);
    }
    std::string config_path;
    app.add_option("--config", config_path, "flat JSON config file; flags override it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError("argv", e.what());
    }
    Settings flags;
    for (const auto& [key, opt] : options) {
        if (opt->count() > 0) flags[key] = raw[key];
    }
    const Settings file = config_path.empty() ? Settings{} : load_config_file(config_path);
    return resolve(file, flags);
}

json echo(const RunConfig& config) {
    const ExperimentConfig& e = config.experiment;
    json out{{"experiment", std::string(to_string(config.kind))},
             {"theta", e.theta},
             {"lambda", e.lambda},
             {"volume", e.volume},
             {"dstep", e.dstep},
             {"trials", e.trials},
             {"seed", e.seed},
             {"ordering", std::string(to_string(e.ordering))}};
    if (!config.angles.empty()) out["angles"] = config.angles;
    return out;
}

namespace {

struct Outcome {
    json result;
    std::vector<CheckRow> rows;
    std::vector<TrialRecord> trials;
    std::optional<EnsembleReport> ensemble;
};

std::vector<double> default_param_angles() {
    constexpr double q = std::numbers::pi / 4.0;
    return {0.0, q, 2.0 * q, 3.0 * q};
}

Outcome execute(const RunConfig& rc) {
    const ExperimentConfig& e = rc.experiment;
    Outcome out;
    switch (rc.kind) {
    case ExperimentKind::born: {
        out.trials = run_trials_p(e);
        out.ensemble = summarize(e, out.trials);
        out.result = to_json(*out.ensemble);
        out.rows = out.ensemble->rows;
        break;
    }
    case ExperimentKind::correlation: {
        std::vector<EnsembleReport> curve;
        if (rc.angles.empty()) {
            curve = correlation_curve(e, 8);
        } else {
            for (std::size_t k = 0; k < rc.angles.size(); ++k) {
                ExperimentConfig c = e;
                c.theta = rc.angles[k];
                c.ensemble += static_cast<std::uint32_t>(k);
                curve.push_back(run_ensemble(c));
            }
        }
        out.result = json::array();
        for (const EnsembleReport& r : curve) {
            out.result.push_back(to_json(r));
            for (CheckRow row : r.rows) {
                row.name = "theta=" + std::to_string(r.config.theta) + " " + row.name;
                out.rows.push_back(row);
            }
        }
        break;
    }
    case ExperimentKind::chsh: {
        std::array<double, 4> thetas = optimal_chsh_angles();
        if (!rc.angles.empty()) std::copy(rc.angles.begin(), rc.angles.end(), thetas.begin());
        const ChshReport r = chsh_experiment(e, thetas);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    case ExperimentKind::param_independence: {
        const std::vector<double> angles = rc.angles.empty() ? default_param_angles() : rc.angles;
        const ParameterIndependenceReport r = parameter_independence_test(e, angles);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    case ExperimentKind::foliation: {
        const Ordering orderings[] = {Ordering::region1_first, Ordering::region2_first,
                                      Ordering::interleaved};
        const FoliationInvarianceReport r = foliation_invariance_test(e, orderings);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    case ExperimentKind::filtering_check: {
        const FilteringReport r = filtering_battery(e);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    case ExperimentKind::martingale: {
        const MartingaleReport r = martingale_test(e);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    case ExperimentKind::measure_change: {
        const MeasureChangeReport r = measure_change_test(e);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    case ExperimentKind::convergence: {
        const double steps[] = {0.005, 0.01, 0.02, 0.04};
        const ConvergenceReport r = convergence_test(e, steps, e.trials);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    case ExperimentKind::charfn: {
        const CharFnReport r = char_fn_test(e, -2.0, 2.0, 5, 0.02);
        out.result = to_json(r);
        out.rows = r.rows;
        break;
    }
    }
    return out;
}

} // namespace

int run(const RunConfig& rc, std::ostream& out) {
    try {
        rc.experiment.validate();
    } catch (const ConfigError& e) {
        throw UsageError("config", e.what());
    }
    Outcome result;
    try {
        result = execute(rc);
    } catch (const ConfigError& e) {
        throw UsageError("config", e.what());
    }
    const Verdict status = overall(result.rows);
    const json doc{{"config", echo(rc)},
                   {"result", result.result},
                   {"status", std::string(to_string(status))}};
    const std::string text = doc.dump(2) + "\n";

    if (rc.out_path) {
        std::ofstream file(*rc.out_path, std::ios::binary);
        if (!file) throw UsageError("out", "cannot write '" + *rc.out_path + "'");
        file << text;
    }
    if (rc.dump_trials_path) {
        std::ofstream file(*rc.dump_trials_path, std::ios::binary);
        if (!file) throw UsageError("dump-trials", "cannot write '" + *rc.dump_trials_path + "'");
        write_trials_csv(file, result.trials);
    }
    if (rc.text) {
        out << "config " << echo(rc).dump() << '\n';
        if (result.ensemble) {
            write_text(out, *result.ensemble);
        } else {
            write_rows_text(out, result.rows);
        }
        out << "status " << to_string(status) << '\n';
    } else if (!rc.out_path) {
        out << text;
    }
    return status == Verdict::fail ? 1 : 0;
}

} // namespace isocollapse::cli
