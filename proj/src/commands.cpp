#include "mrfcox/commands.hpp"

#include "mrfcox/evaluation.hpp"
#include "mrfcox/sample_io.hpp"
#include "mrfcox/study.hpp"
#include "mrfcox/summary.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mrfcox {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
void take(const json& j, const char* key, T& field) {
    if (j.contains(key) && !j.at(key).is_null()) {
        field = j.at(key).get<T>();
    }
}

fs::path require_path(const std::string& value, const char* what) {
    if (value.empty()) {
        throw std::invalid_argument(std::string("missing required path: ") + what);
    }
    return fs::path(value);
}

std::string train_name(int r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "train_%02d.csv", r + 1);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json manifest_header(const char* command, const RunConfig& config) {
    json m;
    m["command"] = command;
    m["version"] = version_string();
    m["config"] = config_to_json(config);
    return m;
}

} // namespace

std::string version_string() {
    return std::string(MRFCOX_VERSION) + "+" + MRFCOX_GIT_DESCRIBE;
}

RunConfig RunConfig::for_profile(const std::string& profile) {
    RunConfig config;
    config.profile = profile;
    if (profile == "desk") {
        config.mcmc = McmcConfig::desk_profile();
    } else if (profile == "paper") {
        config.mcmc = McmcConfig::paper_profile();
    } else {
        throw std::invalid_argument("unknown profile '" + profile + "' (expected desk or paper)");
    }
    return config;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["profile"] = c.profile;
    const auto& m = c.mcmc;
    j["mcmc"] = {{"iterations", m.iterations},
                 {"warmup", m.warmup},
                 {"thin", m.thin},
                 {"chains", m.chains},
                 {"seed", m.seed},
                 {"partition_K", m.partition_K},
                 {"a", m.priors.mrf.a},
                 {"b", m.priors.mrf.b},
                 {"tau", m.priors.spike_slab.tau},
                 {"c", m.priors.spike_slab.c},
                 {"a0", m.priors.baseline.a0},
                 {"eta", m.priors.baseline.eta},
                 {"kappa", m.priors.baseline.kappa},
                 {"baseline_from_data", m.baseline_from_data},
                 {"curvature_floor", m.curvature_floor},
                 {"fallback_sd", m.fallback_sd}};
    const auto& s = c.simulation;
    j["simulation"] = {{"n", s.n},
                       {"p", s.p},
                       {"n_relevant", s.n_relevant},
                       {"block_size", s.block_size},
                       {"block_rho", s.block_rho},
                       {"beta_low", s.beta_low},
                       {"beta_high", s.beta_high},
                       {"weibull_eta", s.weibull_eta},
                       {"weibull_kappa", s.weibull_kappa},
                       {"censor_rate_target", s.censor_rate_target},
                       {"n_datasets", s.n_datasets},
                       {"seed", s.seed}};
    j["evaluation"] = {{"t_star", c.evaluation.t_star ? json(*c.evaluation.t_star) : json(nullptr)},
                       {"stability_threshold", c.evaluation.stability_threshold}};
    j["study"] = {{"replicates", c.study.replicates},
                  {"scenarios", c.study.scenarios},
                  {"workers", c.study.workers}};
    j["perturb"] = {{"mode", c.perturb.mode},
                    {"k", c.perturb.k},
                    {"block", c.perturb.block},
                    {"fraction", c.perturb.fraction},
                    {"seed", c.perturb.seed}};
    const auto& p = c.paths;
    j["paths"] = {{"data", p.data},   {"graph", p.graph}, {"out", p.out},         {"test", p.test},
                  {"fit", p.fit},     {"truth", p.truth}, {"run_dir", p.run_dir}, {"sim_dir", p.sim_dir}};
    return j;
}

RunConfig config_from_json(const json& input, RunConfig c) {
    const json& j = input.contains("config") && input.at("config").is_object() ? input.at("config") : input;
    try {
        take(j, "profile", c.profile);
        if (j.contains("mcmc")) {
            const json& m = j.at("mcmc");
            take(m, "iterations", c.mcmc.iterations);
            take(m, "warmup", c.mcmc.warmup);
            take(m, "thin", c.mcmc.thin);
            take(m, "chains", c.mcmc.chains);
            take(m, "seed", c.mcmc.seed);
            take(m, "partition_K", c.mcmc.partition_K);
            take(m, "a", c.mcmc.priors.mrf.a);
            take(m, "b", c.mcmc.priors.mrf.b);
            take(m, "tau", c.mcmc.priors.spike_slab.tau);
            take(m, "c", c.mcmc.priors.spike_slab.c);
            take(m, "a0", c.mcmc.priors.baseline.a0);
            take(m, "eta", c.mcmc.priors.baseline.eta);
            take(m, "kappa", c.mcmc.priors.baseline.kappa);
            take(m, "baseline_from_data", c.mcmc.baseline_from_data);
            take(m, "curvature_floor", c.mcmc.curvature_floor);
            take(m, "fallback_sd", c.mcmc.fallback_sd);
        }
        if (j.contains("simulation")) {
            const json& s = j.at("simulation");
            take(s, "n", c.simulation.n);
            take(s, "p", c.simulation.p);
            take(s, "n_relevant", c.simulation.n_relevant);
            take(s, "block_size", c.simulation.block_size);
            take(s, "block_rho", c.simulation.block_rho);
            take(s, "beta_low", c.simulation.beta_low);
            take(s, "beta_high", c.simulation.beta_high);
            take(s, "weibull_eta", c.simulation.weibull_eta);
            take(s, "weibull_kappa", c.simulation.weibull_kappa);
            take(s, "censor_rate_target", c.simulation.censor_rate_target);
            take(s, "n_datasets", c.simulation.n_datasets);
            take(s, "seed", c.simulation.seed);
        }
        if (j.contains("evaluation")) {
            const json& e = j.at("evaluation");
            if (e.contains("t_star")) {
                c.evaluation.t_star = e.at("t_star").is_null() ? std::nullopt
                                                               : std::optional<double>(e.at("t_star").get<double>());
            }
            take(e, "stability_threshold", c.evaluation.stability_threshold);
        }
        if (j.contains("study")) {
            const json& s = j.at("study");
            take(s, "replicates", c.study.replicates);
            take(s, "scenarios", c.study.scenarios);
            take(s, "workers", c.study.workers);
        }
        if (j.contains("perturb")) {
            const json& p = j.at("perturb");
            take(p, "mode", c.perturb.mode);
            take(p, "k", c.perturb.k);
            take(p, "block", c.perturb.block);
            take(p, "fraction", c.perturb.fraction);
            take(p, "seed", c.perturb.seed);
        }
        if (j.contains("paths")) {
            const json& p = j.at("paths");
            take(p, "data", c.paths.data);
            take(p, "graph", c.paths.graph);
            take(p, "out", c.paths.out);
            take(p, "test", c.paths.test);
            take(p, "fit", c.paths.fit);
            take(p, "truth", c.paths.truth);
            take(p, "run_dir", c.paths.run_dir);
            take(p, "sim_dir", c.paths.sim_dir);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid config: ") + e.what());
    }
    return c;
}

RunConfig config_from_json(const json& input) {
    const json& j = input.contains("config") && input.at("config").is_object() ? input.at("config") : input;
    const std::string profile = j.value("profile", std::string("desk"));
    return config_from_json(input, RunConfig::for_profile(profile));
}

json cmd_simulate(const RunConfig& config) {
    const fs::path out = require_path(config.paths.out, "--out");
    const SimulationSpec& spec = config.simulation;
    spec.validate();
    fs::create_directories(out / "graphs");

    json manifest = manifest_header("simulate", config);
    std::vector<std::string> files;
    SimulatedData first;
    for (int r = 0; r < spec.n_datasets; ++r) {
        SimulatedData sim = draw_dataset(spec, r);
        write_dataset(sim.data, out / train_name(r));
        files.push_back(train_name(r));
        if (r == 0) {
            first = std::move(sim);
        }
    }
    const SimulatedData test = draw_dataset(spec, test_replicate_id());
    write_dataset(test.data, out / "test.csv");
    files.push_back("test.csv");

    json truth;
    truth["beta_true"] = std::vector<double>(first.beta_true.data(), first.beta_true.data() + first.beta_true.size());
    truth["truth"] = first.truth;
    truth["feature_names"] = first.data.feature_names;
    write_json_atomic(out / "truth.json", truth);

    std::vector<std::string> graph_names;
    json edges;
    for (const auto& g : scenario_graphs(spec)) {
        write_graph(g.graph, out / "graphs" / (g.name + ".txt"));
        graph_names.push_back(g.name);
        edges[g.name] = edge_count(g.graph);
    }
    manifest["files"] = files;
    manifest["graphs"] = graph_names;
    manifest["edge_counts"] = edges;
    write_json_atomic(out / "manifest.json", manifest);
    return {{"out", out.string()}, {"train_sets", spec.n_datasets}, {"graphs", graph_names.size()}};
}

json cmd_fit(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path out = require_path(config.paths.out, "--out");
    const SurvivalDataset data = load_dataset(require_path(config.paths.data, "--data"));
    const PriorGraph graph = config.paths.graph.empty() ? empty_graph(data.p()) : read_graph(config.paths.graph);
    if (graph.p() != data.p()) {
        throw std::invalid_argument("graph dimension p=" + std::to_string(graph.p()) +
                                    " does not match dataset p=" + std::to_string(data.p()));
    }
    const SamplerModel model(data, graph, config.mcmc);
    const auto chains = run_chains_parallel(model, config.study.workers);
    fs::create_directories(out);
    json seeds = json::array();
    json acceptance = json::array();
    for (const auto& c : chains) {
        write_samples(c, out / ("chain_" + std::to_string(c.chain_id + 1)), data.feature_names);
        seeds.push_back(c.rng_seed);
        double mean = 0.0;
        for (const double a : c.acceptance_rates) {
            mean += a;
        }
        acceptance.push_back(mean / static_cast<double>(c.acceptance_rates.size()));
    }
    const MpmFit fit = mpm(std::span<const PosteriorSamples>(chains));
    write_json_atomic(out / "mpm.json", mpm_to_json(fit, data.feature_names, model.partition()));
    write_json_atomic(out / "diagnostics.json", diagnostics_to_json(chains));

    json manifest = manifest_header("fit", config);
    manifest["chain_seeds"] = seeds;
    manifest["acceptance_rate_mean"] = acceptance;
    manifest["feature_names"] = data.feature_names;
    manifest["partition"] = {{"cuts", model.partition().cuts},
                             {"requested_K", model.partition().requested_intervals},
                             {"K", model.partition().K()}};
    const auto& b = model.priors().baseline;
    manifest["baseline"] = {{"a0", b.a0}, {"eta", b.eta}, {"kappa", b.kappa}};
    json warnings = json::array();
    if (model.partition().collapsed()) {
        warnings.push_back("partition collapsed from K=" + std::to_string(model.partition().requested_intervals) +
                           " to K=" + std::to_string(model.partition().K()) + " because of tied times");
    }
    for (std::size_t c = 0; c < acceptance.size(); ++c) {
        const double a = acceptance[c].get<double>();
        if (!(a > 0.1 && a < 0.9)) {
            warnings.push_back("chain " + std::to_string(c + 1) + " mean acceptance rate " + format_double(a) +
                               " outside (0.1, 0.9)");
        }
    }
    manifest["warnings"] = warnings;
    write_json_atomic(out / "manifest.json", manifest);
    const double elapsed = seconds_since(start);
    write_json_atomic(out / "timing.json", {{"seconds", elapsed}});
    return {{"out", out.string()}, {"model_size", fit.model_size}, {"seconds", elapsed}, {"warnings", warnings}};
}

json cmd_summarize(const RunConfig& config) {
    const fs::path run_dir = require_path(config.paths.run_dir, "--run-dir");
    const fs::path out = config.paths.out.empty() ? run_dir : fs::path(config.paths.out);
    const json manifest = read_json(run_dir / "manifest.json");
    const auto names = manifest.at("feature_names").get<std::vector<std::string>>();
    const auto partition = TimePartition::from_cuts(manifest.at("partition").at("cuts").get<std::vector<double>>());
    const auto acceptance = manifest.value("acceptance_rate_mean", std::vector<double>{});
    std::vector<PosteriorSamples> chains;
    for (int c = 0;; ++c) {
        const fs::path dir = run_dir / ("chain_" + std::to_string(c + 1));
        if (!fs::exists(dir / "beta.csv")) {
            break;
        }
        chains.push_back(read_samples(dir));
        chains.back().chain_id = c;
    }
    if (chains.empty()) {
        throw std::runtime_error("no chain_<i>/ sample directories under '" + run_dir.string() + "'");
    }
    const MpmFit fit = mpm(std::span<const PosteriorSamples>(chains));
    json diagnostics = diagnostics_to_json(chains);
    for (std::size_t c = 0; c < chains.size() && c < acceptance.size(); ++c) {
        diagnostics["chains"][c]["acceptance_rate_mean"] = acceptance[c];
    }
    write_json_atomic(out / "mpm.json", mpm_to_json(fit, names, partition));
    write_json_atomic(out / "diagnostics.json", diagnostics);
    // the fit's own manifest may live in the same directory
    json m = manifest_header("summarize", config);
    m["chains"] = chains.size();
    write_json_atomic(out / "summarize_manifest.json", m);
    return {{"out", out.string()}, {"model_size", fit.model_size}, {"chains", chains.size()}};
}

json cmd_evaluate(const RunConfig& config) {
    const fs::path out = require_path(config.paths.out, "--out");
    TimePartition partition;
    const MpmFit fit = mpm_from_json(read_json(require_path(config.paths.fit, "--fit")), &partition);
    const SurvivalDataset test = load_dataset(require_path(config.paths.test, "--test"));
    const SurvivalCurve curve = predict_survival(fit, partition, test.covariates);
    const StepFunction censoring = km_censoring(test);
    const double t_star = config.evaluation.t_star.value_or(default_t_star(test));

    std::ostringstream bs;
    bs << "t,bs\n";
    Index excluded = 0;
    for (const double t : ibs_grid(test, partition.cuts, t_star)) {
        const BrierResult r = brier_score(t, curve, test, censoring);
        excluded = std::max(excluded, r.excluded);
        bs << format_double(t) << ',' << format_double(r.value) << '\n';
    }
    fs::create_directories(out);
    write_text_atomic(out / "bs_curve.csv", bs.str());

    json metrics;
    metrics["ibs"] = integrated_brier_score(t_star, curve, test, censoring);
    metrics["t_star"] = t_star;
    metrics["t_star_source"] = config.evaluation.t_star ? "config" : "95th percentile of test times";
    metrics["time_range"] = "test";
    metrics["model_size"] = fit.model_size;
    metrics["max_excluded_subjects"] = excluded;
    metrics["extrapolated"] = curve.extrapolated(t_star);
    if (!config.paths.truth.empty()) {
        const auto truth = read_json(config.paths.truth).at("truth").get<std::vector<std::uint8_t>>();
        const SelectionMetrics m = selection_metrics(fit.selected, truth);
        metrics["sensitivity"] = m.sensitivity ? json(*m.sensitivity) : json(nullptr);
        metrics["specificity"] = m.specificity ? json(*m.specificity) : json(nullptr);
        metrics["accuracy"] = m.accuracy;
    }
    if (!config.paths.data.empty()) {
        metrics["km_ibs"] = km_reference_ibs(load_dataset(config.paths.data), test, t_star);
    }
    write_json_atomic(out / "metrics.json", metrics);
    write_json_atomic(out / "manifest.json", manifest_header("evaluate", config));
    return metrics;
}

json cmd_perturb_graph(const RunConfig& config) {
    const PriorGraph g = read_graph(require_path(config.paths.graph, "--graph"));
    const fs::path out = require_path(config.paths.out, "--out");
    const auto& p = config.perturb;
    std::vector<Index> block;
    for (const long b : p.block) {
        block.push_back(static_cast<Index>(b - 1));
    }
    PriorGraph result;
    if (p.mode == "uniform") {
        result = remove_edges_uniform(g, p.k);
    } else if (p.mode == "block") {
        result = remove_block_edges(g, block, false);
    } else if (p.mode == "block-plus") {
        result = remove_block_edges(g, block, true);
    } else if (p.mode == "noise") {
        result = add_false_edges(g, p.fraction, p.seed);
    } else {
        throw std::invalid_argument("unknown perturbation mode '" + p.mode + "'");
    }
    if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
    }
    write_graph(result, out);
    json m = manifest_header("perturb-graph", config);
    m["edges_before"] = edge_count(g);
    m["edges_after"] = edge_count(result);
    write_json_atomic(out.string() + ".manifest.json", m);
    return {{"out", out.string()}, {"edges_before", edge_count(g)}, {"edges_after", edge_count(result)}};
}

json cmd_study(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path sim_dir = require_path(config.paths.sim_dir, "--sim-dir");
    const fs::path out = require_path(config.paths.out, "--out");
    const StudyInputs inputs = load_study_inputs(sim_dir);
    StudyOptions options;
    options.scenarios = config.study.scenarios;
    options.replicates = config.study.replicates;
    options.workers = config.study.workers;
    options.t_star = config.evaluation.t_star;
    fs::create_directories(out);
    const StudyResult result = run_study(inputs, config.mcmc, options, out);
    write_study_tables(result, out);

    // per-scenario stability of the selected set across replicates
    const json plan = read_json(out / "study.json");
    std::ostringstream stability;
    stability << "scenario,feature,frequency,coef_mean,coef_sd,stable\n";
    for (const auto& name : plan.at("scenarios").get<std::vector<std::string>>()) {
        std::vector<MpmFit> fits;
        for (const auto& cell : result.cells) {
            if (cell.scenario == name && cell.ok) {
                char tag[32];
                std::snprintf(tag, sizeof(tag), "rep_%02d", cell.replicate + 1);
                fits.push_back(mpm_from_json(read_json(out / "cells" / name / tag / "mpm.json")));
            }
        }
        if (fits.empty()) {
            continue;
        }
        for (const auto& row : stability_report(fits, inputs.train.front().feature_names,
                                                config.evaluation.stability_threshold)) {
            stability << name << ',' << row.name << ',' << format_double(row.frequency) << ','
                      << (row.coef_mean ? format_double(*row.coef_mean) : "") << ','
                      << (row.coef_sd ? format_double(*row.coef_sd) : "") << ',' << (row.stable ? 1 : 0) << '\n';
        }
    }
    write_text_atomic(out / "stability.csv", stability.str());

    int failed = 0;
    for (const auto& cell : result.cells) {
        failed += cell.ok ? 0 : 1;
    }
    json manifest = manifest_header("study", config);
    manifest["cells"] = result.cells.size();
    manifest["failed_cells"] = failed;
    write_json_atomic(out / "manifest.json", manifest);
    const double elapsed = seconds_since(start);
    write_json_atomic(out / "timing.json", {{"seconds", elapsed}});
    return {{"out", out.string()}, {"cells", result.cells.size()}, {"failed_cells", failed}, {"seconds", elapsed}};
}

} // namespace mrfcox
