// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

namespace isocollapse {

using nlohmann::json;

namespace {

std::string spin_text(Spin s) {
    return s == Spin::up ? "0.5" : "-0.5";
}

template <class T, std::size_t N>
json array_json(const std::array<T, N>& a) {
    json out = json::array();
    for (const T& v : a) out.push_back(v);
    return out;
}

const char* kSlotNames[kSlotCount] = {"++", "+-", "-+", "--"};

} // namespace

json to_json(const ExperimentConfig& c) {
    return json{{"theta", c.theta},     {"lambda", c.lambda}, {"volume", c.volume},
                {"dstep", c.dstep},     {"trials", c.trials}, {"seed", c.seed},
                {"ordering", std::string(to_string(c.ordering))}, {"ensemble", c.ensemble}};
}

json to_json(const CheckRow& r) {
    return json{{"name", r.name},           {"observed", r.observed},
                {"predicted", r.predicted}, {"std_error", r.std_error},
                {"tolerance", r.tolerance}, {"samples", r.samples},
                {"verdict", std::string(to_string(r.verdict))}};
}

json to_json(std::span<const CheckRow> rows) {
    json out = json::array();
    for (const CheckRow& r : rows) out.push_back(to_json(r));
    return out;
}

json to_json(const EnsembleReport& rep) {
    json cells = json::object();
    for (std::size_t s = 0; s < kSlotCount; ++s) {
        cells[kSlotNames[s]] = json{{"count", rep.joint_counts[s]},
                                    {"frequency", rep.joint_freq[s]},
                                    {"std_error", rep.joint_se[s]},
                                    {"predicted", rep.predicted_freq[s]}};
    }
    return json{{"config", to_json(rep.config)},
                {"trials", rep.trials},
                {"decided_both", rep.decided_both},
                {"undecided", rep.undecided},
                {"anomalies", rep.anomalies},
                {"joint", cells},
                {"mean_correlation", rep.mean_correlation},
                {"correlation_se", rep.correlation_se},
                {"predicted_correlation", rep.predicted_correlation},
                {"outcome_correlation", rep.outcome_correlation},
                {"outcome_correlation_se", rep.outcome_correlation_se},
                {"particle1_decided", rep.particle1_decided},
                {"particle1_up", rep.particle1_up},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const ParameterIndependenceReport& rep) {
    json per = json::array();
    for (std::size_t i = 0; i < rep.angles.size(); ++i) {
        per.push_back(json{{"theta", rep.angles[i]},
                           {"p1_up", rep.p1_up[i]},
                           {"std_error", rep.p1_se[i]},
                           {"samples", rep.samples[i]}});
    }
    return json{{"angles", per},
                {"max_deviation", rep.max_deviation},
                {"max_deviation_se", rep.max_deviation_se},
                {"within_band", rep.within_band},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const FoliationInvarianceReport& rep) {
    json per = json::array();
    for (std::size_t i = 0; i < rep.counts.size(); ++i) {
        per.push_back(json{{"ordering", rep.labels[i]}, {"counts", array_json(rep.counts[i])}});
    }
    return json{{"orderings", per},
                {"pathwise_trials", rep.pathwise_trials},
                {"pathwise_max_deviation", rep.pathwise_max_deviation},
                {"chi_square", rep.chi_square},
                {"dof", rep.dof},
                {"p_value", rep.p_value},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const ChshReport& rep) {
    return json{{"thetas", array_json(rep.thetas)},
                {"correlations", array_json(rep.correlations)},
                {"correlation_se", array_json(rep.correlation_se)},
                {"samples", array_json(rep.samples)},
                {"chsh", rep.chsh},
                {"chsh_se", rep.chsh_se},
                {"analytic", rep.analytic},
                {"classical_bound", rep.classical_bound},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const MartingaleReport& rep) {
    return json{{"checkpoint_steps", rep.checkpoint_steps},
                {"mean_norm", rep.mean_norm},
                {"norm_se", rep.norm_se},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const MeasureChangeReport& rep) {
    return json{{"p1_importance", rep.p1_importance},
                {"p1_importance_se", rep.p1_importance_se},
                {"p1_direct", rep.p1_direct},
                {"p1_direct_se", rep.p1_direct_se},
                {"joint_importance", rep.joint_importance},
                {"joint_importance_se", rep.joint_importance_se},
                {"joint_direct", rep.joint_direct},
                {"joint_direct_se", rep.joint_direct_se},
                {"effective_samples", rep.effective_samples},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const FilteringReport& rep) {
    return json{{"combinations", rep.combinations},
                {"points", rep.points},
                {"max_deviation", rep.max_deviation},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const ConvergenceReport& rep) {
    return json{{"step_sizes", rep.step_sizes},
                {"strong_error", rep.strong_error},
                {"paths", rep.paths},
                {"refined_steps", rep.refined_steps},
                {"monotone", rep.monotone},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

json to_json(const CharFnReport& rep) {
    json grid = json::array();
    for (std::size_t k = 0; k < rep.points.size(); ++k) {
        grid.push_back(json{{"t1", rep.points[k].first},
                            {"t2", rep.points[k].second},
                            {"empirical", {rep.empirical[k].real(), rep.empirical[k].imag()}},
                            {"analytic", {rep.analytic[k].real(), rep.analytic[k].imag()}}});
    }
    return json{{"grid", grid},
                {"max_abs_error", rep.max_abs_error},
                {"checks", to_json(std::span<const CheckRow>(rep.rows))}};
}

void write_rows_text(std::ostream& out, std::span<const CheckRow> rows) {
    std::size_t width = 5;
    for (const CheckRow& r : rows) width = std::max(width, r.name.size());
    const auto flags = out.flags();
    out << std::left << std::setw(static_cast<int>(width) + 2) << "check" << std::right
        << std::setw(16) << "observed" << std::setw(16) << "predicted" << std::setw(13) << "band"
        << std::setw(10) << "samples" << "  verdict\n";
    for (const CheckRow& r : rows) {
        out << std::left << std::setw(static_cast<int>(width) + 2) << r.name << std::right
            << std::setprecision(8) << std::setw(16) << r.observed << std::setw(16) << r.predicted
            << std::setprecision(3) << std::setw(13) << r.tolerance << std::setw(10) << r.samples
            << "  " << to_string(r.verdict) << '\n';
    }
    out.flags(flags);
}

void write_text(std::ostream& out, const EnsembleReport& rep) {
    const auto flags = out.flags();
    out << "theta=" << rep.config.theta << "  trials=" << rep.trials
        << "  decided=" << rep.decided_both << "  undecided=" << rep.undecided
        << "  anomalies=" << rep.anomalies << '\n';
    out << std::left << std::setw(8) << "cell" << std::right << std::setw(10) << "count"
        << std::setw(14) << "frequency" << std::setw(12) << "se" << std::setw(14) << "predicted" << '\n';
    for (std::size_t s = 0; s < kSlotCount; ++s) {
        out << std::left << std::setw(8) << kSlotNames[s] << std::right << std::setw(10)
            << rep.joint_counts[s] << std::setprecision(6) << std::fixed << std::setw(14)
            << rep.joint_freq[s] << std::setw(12) << rep.joint_se[s] << std::setw(14)
            << rep.predicted_freq[s] << '\n';
        out.unsetf(std::ios_base::floatfield);
    }
    out.flags(flags);
    write_rows_text(out, rep.rows);
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    out << "trial,s1,s2,decided1,decided2,spin1,spin2,joint,xi1,xi2,post_pp,post_pm,post_mp,post_mm,"
           "log_weight\n";
    auto opt = [](const std::optional<Spin>& s) {
        return s ? spin_text(*s) : std::string();
    };
    for (const TrialRecord& r : records) {
        out << r.trial << ',' << (r.hidden ? spin_text(r.hidden->s1) : "") << ','
            << (r.hidden ? spin_text(r.hidden->s2) : "") << ',' << opt(r.decided[0])
            << ',' << opt(r.decided[1]) << ',' << r.spin1 << ',' << r.spin2 << ',' << r.joint << ','
            << r.xi1 << ',' << r.xi2;
        for (double c : r.posterior.cells) out << ',' << c;
        out << ',';
        if (r.log_weight) out << *r.log_weight;
        out << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

} // namespace isocollapse
