// SPDX-License-Identifier: Apache-2.0
//
// moebudget: expert-activation budget allocation pipeline CLI.
// Exit codes: 0 success, 2 input/config error, 3 oracle error, 4 infeasible budget.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "moebudget/baselines.hpp"
#include "moebudget/io.hpp"
#include "moebudget/layer_alloc.hpp"
#include "moebudget/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace moebudget;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Manifests record output files by basename only so that reruns into a
// different directory stay byte-identical.
json make_manifest(const std::string& command, const json& inputs,
                   const std::vector<std::string>& outputs,
                   const std::string& config_hash, std::uint64_t seed) {
    return json{{"command", command},       {"inputs", inputs},
                {"outputs", outputs},       {"config_hash", config_hash},
                {"version", kVersion},      {"seed", seed}};
}

json load_json_file(const fs::path& path) {
    try {
        return json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw invalid_input_error(path.string() + ": " + e.what());
    }
}

SensitivityMatrix load_sensitivity(const fs::path& path) {
    if (path.extension() == ".json")
        return io::sensitivity_from_json(load_json_file(path));
    return io::sensitivity_from_csv(io::read_file(path));
}

struct ProfileArgs {
    std::string oracle = "synthetic";
    fs::path config;
    fs::path out;
    std::string normalize = "submin";
    bool independent = false;
};

int run_profile(const ProfileArgs& args) {
    if (args.oracle != "synthetic")
        throw invalid_input_error("unknown oracle: " + args.oracle);
    std::string config_bytes = io::read_file(args.config);
    SimConfig cfg = SimConfig::from_json(json::parse(config_bytes, nullptr, true));
    SyntheticLossOracle oracle(cfg);
    CountingOracle counting(oracle);
    SensitivityMatrix s = profile_sensitivity(counting, cfg.num_layers, cfg.k_orig,
                                              args.independent);
    s = normalize_rows(s, normalization_from_string(args.normalize));

    fs::path json_out = args.out;
    json_out.replace_extension(".json");
    io::write_file_atomic(args.out, io::sensitivity_to_csv(s));
    io::write_file_atomic(json_out, dump(io::sensitivity_to_json(s)));

    json manifest = make_manifest(
        "profile", json{{"config", args.config.string()}},
        {args.out.filename().string(), json_out.filename().string()},
        io::content_hash(config_bytes), cfg.seed);
    manifest["oracle_calls"] = counting.calls();
    fs::path dir = args.out.has_parent_path() ? args.out.parent_path() : fs::path(".");
    io::write_file_atomic(dir / "manifest.json", dump(manifest));
    return 0;
}

struct AllocArgs {
    fs::path sensitivity;
    fs::path out;
    std::optional<int> budget;
    std::optional<double> avg_k;
    std::string strategy = "dp";
    std::optional<int> k_min, k_max;
    bool spread_remainder = false;
};

int run_alloc(const AllocArgs& args) {
    SensitivityMatrix s = load_sensitivity(args.sensitivity);
    const int L = static_cast<int>(s.num_layers());
    const int k_orig = static_cast<int>(s.k_orig());
    if (!args.budget && !args.avg_k)
        throw invalid_input_error("one of --budget or --avg-k is required");
    BudgetSpec spec = args.budget
                          ? BudgetSpec{L, k_orig, *args.budget}
                          : budget_from_avg(L, k_orig, *args.avg_k);
    spec.validate();

    AllocationVector alloc;
    double objective = 0.0;
    if (args.strategy == "dp") {
        AllocationResult r = optimal_allocation(s, spec);
        alloc = r.alloc;
        objective = r.objective;
    } else {
        if (args.strategy == "uniform") {
            alloc = uniform_allocation(spec, args.spread_remainder);
        } else if (args.strategy == "ascending") {
            alloc = ascending_allocation(spec, args.k_min.value_or(1),
                                         args.k_max.value_or(k_orig));
        } else if (args.strategy == "descending") {
            alloc = descending_allocation(spec, args.k_min.value_or(1),
                                          args.k_max.value_or(k_orig));
        } else {
            throw invalid_input_error("unknown strategy: " + args.strategy);
        }
        for (int i = L - 1; i >= 0; --i) objective = s.at(i, alloc[i]) + objective;
    }

    io::write_file_atomic(args.out, dump(io::allocation_to_json(alloc)));
    fs::path report_path = args.out;
    report_path.replace_extension();
    report_path += "_report.json";
    io::write_file_atomic(report_path,
                          dump(json{{"objective", objective},
                                    {"budget_used", alloc.sum()}}));

    json manifest = make_manifest(
        "alloc", json{{"sensitivity", args.sensitivity.string()}},
        {args.out.filename().string(), report_path.filename().string()},
        io::content_hash(io::read_file(args.sensitivity)), 0);
    fs::path dir = args.out.has_parent_path() ? args.out.parent_path() : fs::path(".");
    io::write_file_atomic(dir / "manifest.json", dump(manifest));
    return 0;
}

std::string layer_file(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "layer_%03d.json", i);
    return buf;
}

struct RedistributeArgs {
    fs::path scores;
    fs::path alloc;
    int k_base = 1;
    fs::path out;
};

int run_redistribute(const RedistributeArgs& args) {
    json scores_json = load_json_file(args.scores);
    if (!scores_json.contains("layers") || !scores_json["layers"].is_array())
        throw invalid_input_error("scores file must contain a \"layers\" array");
    AllocationVector alloc = io::allocation_from_json(load_json_file(args.alloc));
    const auto& layers = scores_json["layers"];
    if (layers.size() != alloc.size())
        throw invalid_input_error("score layer count does not match allocation length");

    std::vector<std::string> outputs;
    json summary_layers = json::array();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        RoutingScoreMatrix probs = io::scores_from_json(layers[i]);
        const int n = static_cast<int>(probs.num_experts());
        LayerTokenBudget budget{static_cast<int>(i), static_cast<double>(alloc[i]),
                                args.k_base, probs.num_tokens()};
        RedistributionPlan plan = redistribute(probs, budget, n);

        std::string name = layer_file(static_cast<int>(i));
        io::write_file_atomic(args.out / name, dump(io::plan_to_json(plan)));
        outputs.push_back(name);

        std::vector<long long> histogram(probs.num_experts() + 1, 0);
        for (std::size_t t = 0; t < probs.num_tokens(); ++t)
            ++histogram[plan.mask.active_count(t)];
        summary_layers.push_back(json{{"layer", i},
                                      {"slots_used", plan.slots_used},
                                      {"total_slots", plan.total_slots},
                                      {"per_token_histogram", histogram}});
    }
    io::write_file_atomic(args.out / "summary.json",
                          dump(json{{"k_base", args.k_base},
                                    {"layers", summary_layers}}));
    outputs.push_back("summary.json");

    json manifest = make_manifest(
        "redistribute",
        json{{"scores", args.scores.string()}, {"alloc", args.alloc.string()}},
        outputs, io::content_hash(io::read_file(args.scores)), 0);
    io::write_file_atomic(args.out / "manifest.json", dump(manifest));
    return 0;
}

std::vector<RedistributionPlan> load_plan_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir))
        throw invalid_input_error("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.starts_with("layer_") && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RedistributionPlan> plans;
    for (const auto& f : files) plans.push_back(io::plan_from_json(load_json_file(f)));
    return plans;
}

json compare_plans(const std::vector<RedistributionPlan>& base,
                   const std::vector<RedistributionPlan>& other,
                   std::string* csv_out) {
    if (base.size() != other.size() || base.empty())
        throw invalid_input_error("plan directories disagree on layer count");
    json rows = json::array();
    std::string csv = "layer,spearman,entropy_delta,js\n";
    double sum_sp = 0.0, sum_ed = 0.0, sum_js = 0.0;
    int sp_count = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (base[i].mask.num_experts() != other[i].mask.num_experts() ||
            base[i].mask.num_tokens() != other[i].mask.num_tokens())
            throw invalid_input_error("layer " + std::to_string(i) + ": shape mismatch");
        ExpertLoad a = expert_load(base[i].mask);
        ExpertLoad b = expert_load(other[i].mask);
        std::vector<double> ca(a.counts.begin(), a.counts.end());
        std::vector<double> cb(b.counts.begin(), b.counts.end());
        auto sp = spearman(ca, cb);
        double ed = normalized_entropy(a.weighted_distribution()) -
                    normalized_entropy(b.weighted_distribution());
        double js = js_divergence(a.weighted_distribution(), b.weighted_distribution());
        rows.push_back(json{{"layer", i},
                            {"spearman", sp ? json(*sp) : json(nullptr)},
                            {"entropy_delta", ed},
                            {"js", js}});
        csv += std::to_string(i) + "," + (sp ? io::format_double(*sp) : "nan") + "," +
               io::format_double(ed) + "," + io::format_double(js) + "\n";
        if (sp) {
            sum_sp += *sp;
            ++sp_count;
        }
        sum_ed += ed;
        sum_js += js;
    }
    const double n = static_cast<double>(base.size());
    json out{{"layers", rows},
             {"aggregate",
              {{"mean_spearman",
                sp_count ? json(sum_sp / sp_count) : json(nullptr)},
               {"mean_entropy_delta", sum_ed / n},
               {"mean_js", sum_js / n}}}};
    if (csv_out) *csv_out = csv;
    return out;
}

struct MetricsArgs {
    fs::path baseline;
    fs::path compare;
    fs::path out;
};

int run_metrics(const MetricsArgs& args) {
    auto base = load_plan_dir(args.baseline);
    auto other = load_plan_dir(args.compare);
    std::string csv;
    json report = compare_plans(base, other, &csv);
    io::write_file_atomic(args.out, dump(report));
    fs::path csv_path = args.out;
    csv_path.replace_extension(".csv");
    io::write_file_atomic(csv_path, csv);

    json manifest = make_manifest(
        "metrics",
        json{{"baseline", args.baseline.string()}, {"compare", args.compare.string()}},
        {args.out.filename().string(), csv_path.filename().string()}, "", 0);
    fs::path dir = args.out.has_parent_path() ? args.out.parent_path() : fs::path(".");
    io::write_file_atomic(dir / "manifest.json", dump(manifest));
    return 0;
}

struct SimulateArgs {
    fs::path config;
    std::optional<int> budget;
    std::optional<double> avg_k;
    int k_base = 1;
    std::optional<std::uint64_t> seed;
    fs::path out;
};

int run_simulate(const SimulateArgs& args) {
    std::string config_bytes = io::read_file(args.config);
    SimConfig cfg;
    try {
        cfg = SimConfig::from_json(json::parse(config_bytes));
    } catch (const json::exception& e) {
        throw invalid_input_error(args.config.string() + ": " + e.what());
    }
    if (args.seed) cfg.seed = *args.seed;
    if (!args.budget && !args.avg_k)
        throw invalid_input_error("one of --budget or --avg-k is required");
    BudgetSpec spec = args.budget
                          ? BudgetSpec{cfg.num_layers, cfg.k_orig, *args.budget}
                          : budget_from_avg(cfg.num_layers, cfg.k_orig, *args.avg_k);
    spec.validate();

    PipelineReport report = run_pipeline(cfg, spec, args.k_base);

    io::write_file_atomic(args.out / "config.json", dump(cfg.to_json()));
    io::write_file_atomic(args.out / "sensitivity.csv",
                          io::sensitivity_to_csv(report.sensitivity_raw));
    io::write_file_atomic(args.out / "sensitivity.json",
                          dump(io::sensitivity_to_json(report.sensitivity_raw)));
    io::write_file_atomic(args.out / "alloc.json",
                          dump(io::allocation_to_json(report.allocation)));

    std::vector<std::string> outputs = {"config.json", "sensitivity.csv",
                                        "sensitivity.json", "alloc.json"};
    for (std::size_t i = 0; i < report.plans.size(); ++i) {
        std::string name = layer_file(static_cast<int>(i));
        io::write_file_atomic(args.out / "plans" / name,
                              dump(io::plan_to_json(report.plans[i])));
        outputs.push_back("plans/" + name);
    }

    json layer_rows = json::array();
    std::string csv = "layer,allocated_k,slots_used,spearman,entropy_delta,js,entropy_alloc_spearman\n";
    for (const LayerReport& lr : report.layers) {
        layer_rows.push_back(json{
            {"layer", lr.layer},
            {"allocated_k", lr.allocated_k},
            {"slots_used", lr.slots_used},
            {"spearman", lr.load_spearman ? json(*lr.load_spearman) : json(nullptr)},
            {"entropy_delta", lr.entropy_delta},
            {"js", lr.js},
            {"entropy_alloc_spearman",
             lr.entropy_alloc_spearman ? json(*lr.entropy_alloc_spearman)
                                       : json(nullptr)}});
        csv += std::to_string(lr.layer) + "," + std::to_string(lr.allocated_k) + "," +
               std::to_string(lr.slots_used) + "," +
               (lr.load_spearman ? io::format_double(*lr.load_spearman) : "nan") + "," +
               io::format_double(lr.entropy_delta) + "," + io::format_double(lr.js) +
               "," +
               (lr.entropy_alloc_spearman
                    ? io::format_double(*lr.entropy_alloc_spearman)
                    : "nan") +
               "\n";
    }
    io::write_file_atomic(args.out / "metrics.json", dump(json{{"layers", layer_rows}}));
    io::write_file_atomic(args.out / "metrics.csv", csv);
    outputs.push_back("metrics.json");
    outputs.push_back("metrics.csv");

    json index{{"objective", report.objective},
               {"budget", spec.global_budget},
               {"budget_used", report.allocation.sum()},
               {"oracle_calls", report.oracle_calls},
               {"speedup_vs_full", report.speedup_vs_full},
               {"artifacts", outputs}};
    io::write_file_atomic(args.out / "report.json", dump(index));
    outputs.push_back("report.json");

    json manifest = make_manifest("simulate", json{{"config", args.config.string()}},
                                  outputs, io::content_hash(config_bytes), cfg.seed);
    manifest["k_base"] = args.k_base;
    io::write_file_atomic(args.out / "manifest.json", dump(manifest));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expert-activation budget allocation pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    ProfileArgs profile_args;
    auto* profile = app.add_subcommand("profile", "profile layer sensitivity");
    profile->add_option("--oracle", profile_args.oracle, "oracle kind (synthetic)");
    profile->add_option("--config", profile_args.config, "simulator config JSON")
        ->required();
    profile->add_option("--out", profile_args.out, "output CSV path")->required();
    profile->add_option("--normalize", profile_args.normalize,
                        "none | submin | divfull");
    profile->add_flag("--independent", profile_args.independent,
                      "re-measure full-activation entries per layer");

    AllocArgs alloc_args;
    auto* alloc = app.add_subcommand("alloc", "solve the layer budget allocation");
    alloc->add_option("--sensitivity", alloc_args.sensitivity, "sensitivity CSV/JSON")
        ->required();
    alloc->add_option("--budget", alloc_args.budget, "global budget B");
    alloc->add_option("--avg-k", alloc_args.avg_k, "average per-layer budget");
    alloc->add_option("--out", alloc_args.out, "allocation JSON path")->required();
    alloc->add_option("--strategy", alloc_args.strategy,
                      "dp | uniform | ascending | descending");
    alloc->add_option("--k-min", alloc_args.k_min, "ascending/descending lower bound");
    alloc->add_option("--k-max", alloc_args.k_max, "ascending/descending upper bound");
    alloc->add_flag("--spread-remainder", alloc_args.spread_remainder,
                    "allow indivisible uniform budgets");

    RedistributeArgs redist_args;
    auto* redist = app.add_subcommand("redistribute",
                                      "token-level redistribution per layer");
    redist->add_option("--scores", redist_args.scores, "per-layer scores JSON")
        ->required();
    redist->add_option("--alloc", redist_args.alloc, "allocation JSON")->required();
    redist->add_option("--k-base", redist_args.k_base, "per-token base retention");
    redist->add_option("--out", redist_args.out, "output directory")->required();

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "compare two plan directories");
    metrics->add_option("--baseline", metrics_args.baseline, "baseline plan dir")
        ->required();
    metrics->add_option("--compare", metrics_args.compare, "comparison plan dir")
        ->required();
    metrics->add_option("--out", metrics_args.out, "metrics JSON path")->required();

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run the full synthetic pipeline");
    simulate->add_option("--config", sim_args.config, "simulator config JSON")
        ->required();
    simulate->add_option("--budget", sim_args.budget, "global budget B");
    simulate->add_option("--avg-k", sim_args.avg_k, "average per-layer budget");
    simulate->add_option("--k-base", sim_args.k_base, "per-token base retention");
    simulate->add_option("--seed", sim_args.seed, "override the config seed");
    simulate->add_option("--out", sim_args.out, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (profile->parsed()) return run_profile(profile_args);
        if (alloc->parsed()) return run_alloc(alloc_args);
        if (redist->parsed()) return run_redistribute(redist_args);
        if (metrics->parsed()) return run_metrics(metrics_args);
        if (simulate->parsed()) return run_simulate(sim_args);
    } catch (const oracle_error& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return 3;
    } catch (const budget_error& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 4;
    } catch (const invalid_input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
