// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "moebudget/baselines.hpp"
#include "moebudget/budget.hpp"
#include "moebudget/routing.hpp"
#include "moebudget/sensitivity.hpp"
#include "moebudget/token_alloc.hpp"

namespace moebudget::io {

using nlohmann::json;

/// Shortest-round-trip formatting capped at 17 significant digits.
std::string format_double(double v);

/// Write via temp file + rename so readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// --- routing scores: JSON {"T","N","rows"} and CSV token,expert,value (dense)
json scores_to_json(const RoutingScoreMatrix& m);
RoutingScoreMatrix scores_from_json(const json& j);
std::string scores_to_csv(const RoutingScoreMatrix& m);
RoutingScoreMatrix scores_from_csv(const std::string& csv);

// --- activation masks: same containers; CSV lists active pairs only, so
// presence encodes the active flag and value the retained weight
json mask_to_json(const ActivationMask& m);
ActivationMask mask_from_json(const json& j);
std::string mask_to_csv(const ActivationMask& m);
ActivationMask mask_from_csv(const std::string& csv, std::size_t tokens,
                             std::size_t experts);

// --- sensitivity: JSON {"L","k_orig","S","normalization"}, CSV layer,k,loss
json sensitivity_to_json(const SensitivityMatrix& s);
SensitivityMatrix sensitivity_from_json(const json& j);
std::string sensitivity_to_csv(const SensitivityMatrix& s);
SensitivityMatrix sensitivity_from_csv(const std::string& csv);

// --- budgets and allocations
json budget_to_json(const BudgetSpec& spec);
BudgetSpec budget_from_json(const json& j);
json allocation_to_json(const AllocationVector& alloc);
AllocationVector allocation_from_json(const json& j);

// --- redistribution plans: mask container plus slot bookkeeping
json plan_to_json(const RedistributionPlan& plan);
RedistributionPlan plan_from_json(const json& j);

json calibration_to_json(const CalibrationResult& r);

/// FNV-1a 64-bit over raw bytes, hex encoded; used for manifest config hashes.
std::string content_hash(const std::string& bytes);

}  // namespace moebudget::io
