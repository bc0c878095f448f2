// SPDX-License-Identifier: Apache-2.0
#include "moebudget/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace moebudget::io {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw invalid_input_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw invalid_input_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (double v : m.row(r)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_rows(const json& rows, std::size_t expect_rows,
                        std::size_t expect_cols) {
    if (!rows.is_array() || rows.size() != expect_rows)
        throw invalid_input_error("matrix JSON: wrong row count");
    Matrix m(expect_rows, expect_cols);
    for (std::size_t r = 0; r < expect_rows; ++r) {
        const json& row = rows[r];
        if (!row.is_array() || row.size() != expect_cols)
            throw invalid_input_error("matrix JSON: wrong column count");
        for (std::size_t c = 0; c < expect_cols; ++c) m(r, c) = row[c].get<double>();
    }
    return m;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

}  // namespace

json scores_to_json(const RoutingScoreMatrix& m) {
    return json{{"T", m.num_tokens()}, {"N", m.num_experts()},
                {"rows", matrix_rows(m.probs)}};
}

RoutingScoreMatrix scores_from_json(const json& j) {
    return RoutingScoreMatrix::validated(
        matrix_from_rows(j.at("rows"), j.at("T").get<std::size_t>(),
                         j.at("N").get<std::size_t>()));
}

std::string scores_to_csv(const RoutingScoreMatrix& m) {
    std::string out = "token,expert,value\n";
    for (std::size_t t = 0; t < m.num_tokens(); ++t)
        for (std::size_t e = 0; e < m.num_experts(); ++e)
            out += std::to_string(t) + "," + std::to_string(e) + "," +
                   format_double(m.probs(t, e)) + "\n";
    return out;
}

RoutingScoreMatrix scores_from_csv(const std::string& csv) {
    std::stringstream ss(csv);
    std::string line;
    if (!std::getline(ss, line) || line != "token,expert,value")
        throw invalid_input_error("scores CSV: bad header");
    std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
    std::size_t max_t = 0, max_e = 0;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 3) throw invalid_input_error("scores CSV: bad row");
        std::size_t t = std::stoul(f[0]), e = std::stoul(f[1]);
        entries.emplace_back(t, e, std::stod(f[2]));
        max_t = std::max(max_t, t);
        max_e = std::max(max_e, e);
    }
    Matrix m(max_t + 1, max_e + 1);
    for (auto& [t, e, v] : entries) m(t, e) = v;
    return RoutingScoreMatrix::validated(std::move(m));
}

json mask_to_json(const ActivationMask& m) {
    json active = json::array();
    for (std::size_t t = 0; t < m.num_tokens(); ++t) {
        json row = json::array();
        for (std::size_t e = 0; e < m.num_experts(); ++e)
            row.push_back(m.is_active(t, e) ? 1 : 0);
        active.push_back(std::move(row));
    }
    return json{{"T", m.num_tokens()}, {"N", m.num_experts()},
                {"rows", matrix_rows(m.weights)}, {"active", std::move(active)}};
}

ActivationMask mask_from_json(const json& j) {
    const std::size_t T = j.at("T").get<std::size_t>();
    const std::size_t N = j.at("N").get<std::size_t>();
    ActivationMask m(T, N);
    m.weights = matrix_from_rows(j.at("rows"), T, N);
    const json& active = j.at("active");
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t e = 0; e < N; ++e)
            m.active[t * N + e] = active[t][e].get<int>() ? 1 : 0;
    return m;
}

std::string mask_to_csv(const ActivationMask& m) {
    std::string out = "token,expert,value\n";
    for (std::size_t t = 0; t < m.num_tokens(); ++t)
        for (std::size_t e = 0; e < m.num_experts(); ++e)
            if (m.is_active(t, e))
                out += std::to_string(t) + "," + std::to_string(e) + "," +
                       format_double(m.weights(t, e)) + "\n";
    return out;
}

ActivationMask mask_from_csv(const std::string& csv, std::size_t tokens,
                             std::size_t experts) {
    std::stringstream ss(csv);
    std::string line;
    if (!std::getline(ss, line) || line != "token,expert,value")
        throw invalid_input_error("mask CSV: bad header");
    ActivationMask m(tokens, experts);
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 3) throw invalid_input_error("mask CSV: bad row");
        m.set_active(std::stoul(f[0]), std::stoul(f[1]), std::stod(f[2]));
    }
    return m;
}

json sensitivity_to_json(const SensitivityMatrix& s) {
    return json{{"L", s.num_layers()}, {"k_orig", s.k_orig()},
                {"S", matrix_rows(s.values)},
                {"normalization", to_string(s.normalization)}};
}

SensitivityMatrix sensitivity_from_json(const json& j) {
    SensitivityMatrix s;
    s.values = matrix_from_rows(j.at("S"), j.at("L").get<std::size_t>(),
                                j.at("k_orig").get<std::size_t>());
    s.normalization = normalization_from_string(
        j.value("normalization", std::string("none")));
    return s;
}

std::string sensitivity_to_csv(const SensitivityMatrix& s) {
    std::string out = "layer,k,loss\n";
    for (std::size_t i = 0; i < s.num_layers(); ++i)
        for (std::size_t k = 1; k <= s.k_orig(); ++k)
            out += std::to_string(i) + "," + std::to_string(k) + "," +
                   format_double(s.at(i, static_cast<int>(k))) + "\n";
    return out;
}

SensitivityMatrix sensitivity_from_csv(const std::string& csv) {
    std::stringstream ss(csv);
    std::string line;
    if (!std::getline(ss, line) || line != "layer,k,loss")
        throw invalid_input_error("sensitivity CSV: bad header");
    std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
    std::size_t max_l = 0, max_k = 0;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 3) throw invalid_input_error("sensitivity CSV: bad row");
        std::size_t l = std::stoul(f[0]), k = std::stoul(f[1]);
        if (k < 1) throw invalid_input_error("sensitivity CSV: k must be >= 1");
        entries.emplace_back(l, k, std::stod(f[2]));
        max_l = std::max(max_l, l);
        max_k = std::max(max_k, k);
    }
    SensitivityMatrix s;
    s.values = Matrix(max_l + 1, max_k);
    for (auto& [l, k, v] : entries) s.values(l, k - 1) = v;
    return s;
}

json budget_to_json(const BudgetSpec& spec) {
    return json{{"L", spec.num_layers}, {"k_orig", spec.k_orig},
                {"B", spec.global_budget}};
}

BudgetSpec budget_from_json(const json& j) {
    BudgetSpec spec{j.at("L").get<int>(), j.at("k_orig").get<int>(),
                    j.at("B").get<int>()};
    spec.validate();
    return spec;
}

json allocation_to_json(const AllocationVector& alloc) {
    return json{{"per_layer", alloc.per_layer}};
}

AllocationVector allocation_from_json(const json& j) {
    return AllocationVector{j.at("per_layer").get<std::vector<int>>()};
}

json plan_to_json(const RedistributionPlan& plan) {
    json j = mask_to_json(plan.mask);
    j["k_base"] = plan.k_base;
    j["total_slots"] = plan.total_slots;
    j["slots_used"] = plan.slots_used;
    return j;
}

RedistributionPlan plan_from_json(const json& j) {
    RedistributionPlan plan;
    plan.mask = mask_from_json(j);
    plan.k_base = j.at("k_base").get<int>();
    plan.total_slots = j.at("total_slots").get<long long>();
    plan.slots_used = j.at("slots_used").get<long long>();
    return plan;
}

json calibration_to_json(const CalibrationResult& r) {
    return json{{"threshold", r.threshold}, {"achieved_avg", r.achieved_avg},
                {"target_avg", r.target_avg}};
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace moebudget::io
