// Command-line driver: simulate, fit, summarize, evaluate, perturb-graph, study.

#include "mrfcox/commands.hpp"
#include "mrfcox/sample_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

// Flags are parsed into optionals and laid over the configuration last.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> profile;
    std::optional<std::string> config_file;
    std::optional<int> iterations, warmup, thin, chains, partition_K;
    std::optional<double> a, b, tau, c, a0;
    std::optional<int> n_datasets, replicates;
    std::optional<double> censor_rate;
    std::optional<unsigned> workers;
    std::optional<double> t_star;
    std::vector<std::string> scenarios;
    std::optional<std::string> mode;
    std::optional<int> k;
    std::vector<long> block;
    std::optional<double> fraction;
    mrfcox::PathSettings paths;
};

template <class T>
void apply(const std::optional<T>& v, T& field) {
    if (v) {
        field = *v;
    }
}

void apply_path(const std::string& v, std::string& field) {
    if (!v.empty()) {
        field = v;
    }
}

mrfcox::RunConfig resolve(const Overrides& o) {
    json file = json::object();
    if (o.config_file) {
        file = mrfcox::read_json(*o.config_file);
    }
    const json& inner = file.contains("config") && file.at("config").is_object() ? file.at("config") : file;
    const std::string profile = o.profile.value_or(inner.value("profile", std::string("desk")));
    mrfcox::RunConfig config = mrfcox::config_from_json(file, mrfcox::RunConfig::for_profile(profile));
    if (o.profile) {
        // an explicit profile wins over the iteration budget in the file
        const auto p = mrfcox::RunConfig::for_profile(*o.profile);
        config.profile = *o.profile;
        config.mcmc.iterations = p.mcmc.iterations;
        config.mcmc.warmup = p.mcmc.warmup;
        config.mcmc.thin = p.mcmc.thin;
    }
    if (o.seed) {
        config.mcmc.seed = *o.seed;
        config.simulation.seed = *o.seed;
        config.perturb.seed = *o.seed;
    }
    apply(o.iterations, config.mcmc.iterations);
    apply(o.warmup, config.mcmc.warmup);
    apply(o.thin, config.mcmc.thin);
    apply(o.chains, config.mcmc.chains);
    apply(o.partition_K, config.mcmc.partition_K);
    apply(o.a, config.mcmc.priors.mrf.a);
    apply(o.b, config.mcmc.priors.mrf.b);
    apply(o.tau, config.mcmc.priors.spike_slab.tau);
    apply(o.c, config.mcmc.priors.spike_slab.c);
    apply(o.a0, config.mcmc.priors.baseline.a0);
    apply(o.n_datasets, config.simulation.n_datasets);
    apply(o.censor_rate, config.simulation.censor_rate_target);
    apply(o.replicates, config.study.replicates);
    apply(o.workers, config.study.workers);
    if (o.t_star) {
        config.evaluation.t_star = o.t_star;
    }
    if (!o.scenarios.empty()) {
        config.study.scenarios = o.scenarios;
    }
    apply(o.mode, config.perturb.mode);
    apply(o.k, config.perturb.k);
    if (!o.block.empty()) {
        config.perturb.block = o.block;
    }
    apply(o.fraction, config.perturb.fraction);
    apply_path(o.paths.data, config.paths.data);
    apply_path(o.paths.graph, config.paths.graph);
    apply_path(o.paths.out, config.paths.out);
    apply_path(o.paths.test, config.paths.test);
    apply_path(o.paths.fit, config.paths.fit);
    apply_path(o.paths.truth, config.paths.truth);
    apply_path(o.paths.run_dir, config.paths.run_dir);
    apply_path(o.paths.sim_dir, config.paths.sim_dir);
    return config;
}

void common_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_file, "JSON config file or a run manifest to replay");
    cmd->add_option("--seed", o.seed, "Root seed for every random stream");
    cmd->add_option("--out", o.paths.out, "Output directory (output file for perturb-graph)");
    cmd->add_option("--profile", o.profile, "Iteration budget: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
}

void mcmc_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--iterations", o.iterations, "Total MCMC iterations");
    cmd->add_option("--warmup", o.warmup, "Warmup iterations discarded");
    cmd->add_option("--thin", o.thin, "Thinning interval");
    cmd->add_option("--chains", o.chains, "Independent chains");
    cmd->add_option("--intervals", o.partition_K, "Baseline hazard intervals K");
    cmd->add_option("--a", o.a, "MRF sparsity parameter");
    cmd->add_option("--b", o.b, "MRF graph weight");
    cmd->add_option("--tau", o.tau, "Spike standard deviation");
    cmd->add_option("--c", o.c, "Slab inflation factor");
    cmd->add_option("--a0", o.a0, "Gamma-process confidence weight");
    cmd->add_option("--workers", o.workers, "Worker threads (0 = hardware concurrency)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian Cox model with graph-structured spike-and-slab variable selection"};
    app.set_version_flag("--version", mrfcox::version_string());
    app.require_subcommand(1);
    Overrides o;

    auto* simulate = app.add_subcommand("simulate", "Generate training/test replicates and scenario graphs");
    common_flags(simulate, o);
    simulate->add_option("--datasets", o.n_datasets, "Number of training replicates");
    simulate->add_option("--censoring", o.censor_rate, "Target censoring fraction");

    auto* fit = app.add_subcommand("fit", "Run the MCMC sampler on a dataset");
    common_flags(fit, o);
    mcmc_flags(fit, o);
    fit->add_option("--data", o.paths.data, "Dataset CSV (time,status,features...)");
    fit->add_option("--graph", o.paths.graph, "Prior graph edge list (default: empty graph)");

    auto* summarize = app.add_subcommand("summarize", "Median probability model and diagnostics from saved samples");
    common_flags(summarize, o);
    summarize->add_option("--run-dir", o.paths.run_dir, "Directory written by fit");

    auto* evaluate = app.add_subcommand("evaluate", "Brier score and IBS of a fitted model on test data");
    common_flags(evaluate, o);
    evaluate->add_option("--fit", o.paths.fit, "mpm.json from fit or summarize");
    evaluate->add_option("--test", o.paths.test, "Test dataset CSV");
    evaluate->add_option("--truth", o.paths.truth, "truth.json for selection metrics");
    evaluate->add_option("--train", o.paths.data, "Training CSV for the Kaplan-Meier reference");
    evaluate->add_option("--t-star", o.t_star, "IBS horizon (default: 95th percentile of test times)");

    auto* perturb = app.add_subcommand("perturb-graph", "Apply an edge perturbation to a prior graph");
    common_flags(perturb, o);
    perturb->add_option("--graph", o.paths.graph, "Input edge list")->required();
    perturb->add_option("--mode", o.mode, "uniform, block, block-plus or noise")
        ->check(CLI::IsMember({"uniform", "block", "block-plus", "noise"}));
    perturb->add_option("--k", o.k, "Keep every k-th edge (uniform)");
    perturb->add_option("--block", o.block, "1-based vertex indices (block, block-plus)")->delimiter(',');
    perturb->add_option("--fraction", o.fraction, "False edges relative to existing edges (noise)");

    auto* study = app.add_subcommand("study", "Fit every scenario graph on every replicate and tabulate");
    common_flags(study, o);
    mcmc_flags(study, o);
    study->add_option("--sim-dir", o.paths.sim_dir, "Directory written by simulate");
    study->add_option("--replicates", o.replicates, "Use the first N training replicates (0 = all)");
    study->add_option("--scenarios", o.scenarios, "Subset of scenario names")->delimiter(',');
    study->add_option("--t-star", o.t_star, "IBS horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const mrfcox::RunConfig config = resolve(o);
        json result;
        if (*simulate) {
            result = mrfcox::cmd_simulate(config);
        } else if (*fit) {
            result = mrfcox::cmd_fit(config);
            for (const auto& w : result.at("warnings")) {
                std::cerr << "warning: " << w.get<std::string>() << '\n';
            }
        } else if (*summarize) {
            result = mrfcox::cmd_summarize(config);
        } else if (*evaluate) {
            result = mrfcox::cmd_evaluate(config);
        } else if (*perturb) {
            result = mrfcox::cmd_perturb_graph(config);
        } else if (*study) {
            result = mrfcox::cmd_study(config);
        }
        std::cout << result.dump() << '\n';
    } catch (const mrfcox::ParseError& e) {
        std::cerr << json{{"error", {{"type", "parse_error"}, {"message", e.what()}}}}.dump() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", {{"type", "invalid_argument"}, {"message", e.what()}}}}.dump() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"type", "runtime_error"}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    }
    return 0;
}
