// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isocollapse/filtering.hpp"
#include "isocollapse/foliation.hpp"
#include "isocollapse/pmeasure.hpp"
#include "isocollapse/state_core.hpp"

namespace isocollapse {

/// A particle is decided once |<n_a . S_a>| >= 1/2 - kDecisionTolerance.
inline constexpr double kDecisionTolerance = 1e-6;
/// lambda^2 Omega per region beyond which decisions must match the hidden outcome.
inline constexpr double kReductionVolume = 5.0;
/// Statistical bands are 3 standard errors wide.
inline constexpr double kBandSigmas = 3.0;
/// Two-sided normal tail beyond 3 sigma; chi-square p-values below this fail.
inline constexpr double kThreeSigmaPValue = 0.0026997960632601866;
/// Statistical checks with fewer samples than this report "inconclusive".
inline constexpr std::size_t kMinConclusiveSamples = 1000;
/// Numerical floor on band half-widths; a zero-variance estimate still gets this slack.
inline constexpr double kBandFloor = 1e-12;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    double theta = 0.0;
    double lambda = 1.0;
    double volume = kReductionVolume; ///< lambda^2 Omega per region
    double dstep = 0.01;              ///< lambda^2 d omega per step
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    Ordering ordering = Ordering::interleaved;
    unsigned threads = 1;
    std::uint32_t ensemble = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    [[nodiscard]] MeasurementFrame frame() const;
    [[nodiscard]] FoliationSchedule schedule() const;
    /// Region volumes in units of 1/lambda^2.
    [[nodiscard]] double omega_total() const noexcept { return volume / (lambda * lambda); }
};

/// Runs body(i) for i in [0, n) on `threads` workers; each index runs exactly once.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

enum class Verdict { pass, fail, inconclusive };
std::string_view to_string(Verdict v) noexcept;

/// One observed-vs-predicted comparison with its acceptance band.
struct CheckRow {
    std::string name;
    double observed = 0.0;
    double predicted = 0.0;
    double std_error = 0.0;
    double tolerance = 0.0; ///< band half-width on |observed - predicted|
    std::size_t samples = 0;
    Verdict verdict = Verdict::pass;
};

/// Statistical row: tolerance = max(3 se, floor); inconclusive below kMinConclusiveSamples.
CheckRow statistical_check(std::string name, double observed, double predicted, double std_error,
                           std::size_t samples);
/// Deterministic row: passes iff observed <= bound.
CheckRow bound_check(std::string name, double observed, double bound);

Verdict overall(std::span<const CheckRow> rows) noexcept;

std::optional<Spin> decide(double spin_expectation);

struct TrialRecord {
    std::uint64_t trial = 0;
    std::optional<HiddenOutcome> hidden;
    std::array<std::optional<Spin>, 2> decided;
    double spin1 = 0.0;
    double spin2 = 0.0;
    double joint = 0.0;
    double p1_up = 0.0; ///< final <P+ for particle 1>
    double xi1 = 0.0;
    double xi2 = 0.0;
    Posterior posterior;
    std::optional<double> log_weight; ///< Q-mode trials only

    [[nodiscard]] bool both_decided() const noexcept { return decided[0] && decided[1]; }
};

/*!
 * One P-measure trial: sample the hidden outcome (particle assigned first
 * follows the foliation order), the information path, and read off the
 * state at the final surface.
 */
TrialRecord run_trial_p(const ExperimentConfig& config, const FoliationSchedule& schedule,
                        std::uint64_t trial);

/// One Q-measure trial through the exact integrator, carrying its weight.
TrialRecord run_trial_q(const ExperimentConfig& config, const FoliationSchedule& schedule,
                        std::uint64_t trial);

std::vector<TrialRecord> run_trials_p(const ExperimentConfig& config);
std::vector<TrialRecord> run_trials_p(const ExperimentConfig& config,
                                      const FoliationSchedule& schedule);

struct EnsembleReport {
    ExperimentConfig config;
    std::size_t trials = 0;
    std::size_t decided_both = 0;
    std::size_t undecided = 0; ///< trials with at least one particle undecided
    std::size_t anomalies = 0; ///< decided particles disagreeing with the hidden outcome
    std::array<std::size_t, kSlotCount> joint_counts{};
    std::array<double, kSlotCount> joint_freq{};
    std::array<double, kSlotCount> joint_se{};
    std::array<double, kSlotCount> predicted_freq{};
    double mean_correlation = 0.0;
    double correlation_se = 0.0;
    double predicted_correlation = 0.0;
    /// Mean of (2 s1)(2 s2) over decided trials and its standard error.
    double outcome_correlation = 0.0;
    double outcome_correlation_se = 0.0;
    std::size_t particle1_decided = 0;
    std::size_t particle1_up = 0;
    std::vector<CheckRow> rows;
};

EnsembleReport summarize(const ExperimentConfig& config, std::span<const TrialRecord> records);
EnsembleReport run_ensemble(const ExperimentConfig& config);

/// Ensembles at theta_k = k pi / (count - 1).
std::vector<EnsembleReport> correlation_curve(const ExperimentConfig& config, std::size_t count);

struct ParameterIndependenceReport {
    std::vector<double> angles;
    std::vector<double> p1_up;
    std::vector<double> p1_se;
    std::vector<std::size_t> samples;
    double max_deviation = 0.0;
    double max_deviation_se = 0.0;
    bool within_band = true;
    std::vector<CheckRow> rows;
};

/// Particle-1 marginal for each n2; all angles share the config's random streams.
ParameterIndependenceReport parameter_independence_test(const ExperimentConfig& config,
                                                        std::span<const double> angles);

struct FoliationInvarianceReport {
    std::vector<std::string> labels;
    std::size_t pathwise_trials = 0;
    double pathwise_max_deviation = 0.0;
    std::vector<std::array<std::size_t, kSlotCount>> counts;
    double chi_square = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
    std::vector<CheckRow> rows;
};

/*!
 * (a) Shared hidden outcomes and noise draws pushed through every schedule;
 * terminal states compared pathwise. (b) Independent ensembles per schedule,
 * compared by a chi-square homogeneity test on the decided-outcome counts.
 * Throws ConfigError if the schedules' totals differ.
 */
FoliationInvarianceReport foliation_invariance_test(const ExperimentConfig& config,
                                                    std::span<const FoliationSchedule> schedules,
                                                    std::span<const std::string> labels);
FoliationInvarianceReport foliation_invariance_test(const ExperimentConfig& config,
                                                    std::span<const Ordering> orderings);

struct ChshReport {
    std::array<double, 4> thetas{};
    std::array<double, 4> correlations{};
    std::array<double, 4> correlation_se{};
    std::array<std::size_t, 4> samples{};
    double chsh = 0.0;
    double chsh_se = 0.0;
    double analytic = 0.0;
    double classical_bound = 2.0;
    std::vector<CheckRow> rows;
};

ChshReport chsh_experiment(const ExperimentConfig& config, const std::array<double, 4>& thetas);

struct MartingaleReport {
    std::vector<std::size_t> checkpoint_steps;
    std::vector<double> mean_norm;
    std::vector<double> norm_se;
    std::vector<CheckRow> rows;
};

/// Q-mean of the squared norm after 1/3, 2/3 and all of the schedule.
MartingaleReport martingale_test(const ExperimentConfig& config);

struct MeasureChangeReport {
    double p1_importance = 0.0, p1_importance_se = 0.0;
    double p1_direct = 0.0, p1_direct_se = 0.0;
    double joint_importance = 0.0, joint_importance_se = 0.0;
    double joint_direct = 0.0, joint_direct_se = 0.0;
    double effective_samples = 0.0;
    std::vector<CheckRow> rows;
};

/// Final <P1+> and <(n1.S1)(n2.S2)> estimated by weighted Q-sampling and by direct P-sampling.
MeasureChangeReport measure_change_test(const ExperimentConfig& config);

struct FilteringReport {
    std::size_t combinations = 0;
    std::size_t points = 0;
    double max_deviation = 0.0;
    std::vector<CheckRow> rows;
};

/// Random (theta, lambda, schedule, seed) combinations; `combinations` = config.trials.
FilteringReport filtering_battery(const ExperimentConfig& config);

struct ConvergenceReport {
    std::vector<double> step_sizes; ///< lambda^2 d omega
    std::vector<double> strong_error;
    std::size_t paths = 0;
    std::size_t refined_steps = 0;
    bool monotone = false;
    std::vector<CheckRow> rows;
};

/*!
 * Euler-Maruyama against the exact solution on shared noise: the finest
 * increments are summed into coarser ones. Strong error is the path mean of
 * the largest per-slot amplitude difference at the final surface.
 * step_sizes must be integer multiples of the smallest one.
 */
ConvergenceReport convergence_test(const ExperimentConfig& config,
                                   std::span<const double> step_sizes, std::size_t paths);

struct CharFnReport {
    std::vector<std::pair<double, double>> points;
    std::vector<std::complex<double>> empirical;
    std::vector<std::complex<double>> analytic;
    double max_abs_error = 0.0;
    std::vector<CheckRow> rows;
};

/// Empirical P-ensemble characteristic function against char_fn on an n x n grid.
CharFnReport char_fn_test(const ExperimentConfig& config, double lo, double hi, std::size_t n,
                          double tolerance);

} // namespace isocollapse
