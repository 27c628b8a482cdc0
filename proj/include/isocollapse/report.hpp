// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string_view>

#include <json.hpp>

#include "isocollapse/harness.hpp"

namespace isocollapse {

// JSON views of the harness results. Objects use nlohmann::json's sorted
// keys, so a dump is a pure function of the values.
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const CheckRow& row);
nlohmann::json to_json(std::span<const CheckRow> rows);
nlohmann::json to_json(const EnsembleReport& rep);
nlohmann::json to_json(const ParameterIndependenceReport& rep);
nlohmann::json to_json(const FoliationInvarianceReport& rep);
nlohmann::json to_json(const ChshReport& rep);
nlohmann::json to_json(const MartingaleReport& rep);
nlohmann::json to_json(const MeasureChangeReport& rep);
nlohmann::json to_json(const FilteringReport& rep);
nlohmann::json to_json(const ConvergenceReport& rep);
nlohmann::json to_json(const CharFnReport& rep);

/// Aligned columns: name, observed, predicted, band, samples, verdict.
void write_rows_text(std::ostream& out, std::span<const CheckRow> rows);

/// Joint-outcome table plus comparison rows.
void write_text(std::ostream& out, const EnsembleReport& rep);

/// Header `trial,s1,s2,decided1,decided2,spin1,spin2,joint,xi1,xi2,post_pp,post_pm,post_mp,post_mm,log_weight`.
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records);

} // namespace isocollapse
