#include "mrfcox/study.hpp"

#include "mrfcox/evaluation.hpp"
#include "mrfcox/sample_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace mrfcox {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string replicate_tag(int replicate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rep_%02d", replicate + 1);
    return buf;
}

std::string train_file_name(int replicate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "train_%02d.csv", replicate + 1);
    return buf;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_from(const json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    return j.get<double>();
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe out;
    if (v.empty()) {
        return out;
    }
    for (const double x : v) {
        out.mean += x;
    }
    out.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (const double x : v) {
            ss += (x - out.mean) * (x - out.mean);
        }
        out.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

StudyInputs simulate_study_inputs(const SimulationSpec& spec) {
    StudyInputs inputs;
    for (int r = 0; r < spec.n_datasets; ++r) {
        auto sim = draw_dataset(spec, r);
        if (r == 0) {
            inputs.truth = sim.truth;
        }
        inputs.train.push_back(std::move(sim.data));
    }
    inputs.test = draw_dataset(spec, test_replicate_id()).data;
    inputs.graphs = scenario_graphs(spec);
    return inputs;
}

StudyInputs load_study_inputs(const fs::path& sim_dir) {
    StudyInputs inputs;
    const json manifest = read_json(sim_dir / "manifest.json");
    const json truth = read_json(sim_dir / "truth.json");
    inputs.truth = truth.at("truth").get<std::vector<std::uint8_t>>();
    const int n = manifest.at("config").at("simulation").at("n_datasets").get<int>();
    for (int r = 0; r < n; ++r) {
        inputs.train.push_back(load_dataset(sim_dir / train_file_name(r)));
    }
    inputs.test = load_dataset(sim_dir / "test.csv");
    for (const auto& name : manifest.at("graphs").get<std::vector<std::string>>()) {
        inputs.graphs.push_back({name, read_graph(sim_dir / "graphs" / (name + ".txt"))});
    }
    return inputs;
}

StudyResult run_study(const StudyInputs& inputs, const McmcConfig& mcmc, const StudyOptions& options,
                      const fs::path& out_dir) {
    std::vector<const NamedGraph*> graphs;
    if (options.scenarios.empty()) {
        for (const auto& g : inputs.graphs) {
            graphs.push_back(&g);
        }
    } else {
        for (const auto& name : options.scenarios) {
            const auto it = std::find_if(inputs.graphs.begin(), inputs.graphs.end(),
                                         [&](const NamedGraph& g) { return g.name == name; });
            if (it == inputs.graphs.end()) {
                throw std::invalid_argument("unknown scenario '" + name + "'");
            }
            graphs.push_back(&*it);
        }
    }
    const int available = static_cast<int>(inputs.train.size());
    const int replicates = options.replicates > 0 ? std::min(options.replicates, available) : available;
    const double t_star = options.t_star.value_or(default_t_star(inputs.test));

    json plan;
    plan["t_star"] = t_star;
    plan["replicates"] = replicates;
    std::vector<std::string> names;
    for (const auto* g : graphs) {
        names.push_back(g->name);
    }
    plan["scenarios"] = names;
    plan["root_seed"] = mcmc.seed;
    write_json_atomic(out_dir / "study.json", plan);

    const StepFunction censoring = km_censoring(inputs.test);
    for (int r = 0; r < replicates; ++r) {
        json km;
        km["replicate"] = r;
        km["ibs"] = km_reference_ibs(inputs.train[r], inputs.test, t_star);
        write_json_atomic(out_dir / "km" / (replicate_tag(r) + ".json"), km);
    }

    const int total = static_cast<int>(graphs.size()) * replicates;
    std::atomic<int> next{0};
    auto work = [&] {
        for (int c = next.fetch_add(1); c < total; c = next.fetch_add(1)) {
            const NamedGraph& graph = *graphs[c / replicates];
            const int r = c % replicates;
            McmcConfig config = mcmc;
            config.seed = derive_seed(mcmc.seed, static_cast<std::uint64_t>(r));
            json cell;
            cell["scenario"] = graph.name;
            cell["replicate"] = r;
            cell["seed"] = config.seed;
            const fs::path cell_dir = out_dir / "cells" / graph.name / replicate_tag(r);
            try {
                const SamplerModel model(inputs.train[r], graph.graph, config);
                std::vector<PosteriorSamples> chains;
                for (int ch = 0; ch < config.chains; ++ch) {
                    chains.push_back(run_chain(model, ch));
                }
                const MpmFit fit = mpm(std::span<const PosteriorSamples>(chains));
                const SelectionMetrics m = selection_metrics(fit.selected, inputs.truth);
                const SurvivalCurve curve = predict_survival(fit, model.partition(), inputs.test.covariates);
                cell["ok"] = true;
                cell["sensitivity"] = optional_json(m.sensitivity);
                cell["specificity"] = optional_json(m.specificity);
                cell["accuracy"] = m.accuracy;
                cell["model_size"] = fit.model_size;
                cell["ibs"] = integrated_brier_score(t_star, curve, inputs.test, censoring);
                const auto& trace = chains.front().model_size_trace;
                cell["ess_model_size"] = trace.size() >= 10
                                             ? effective_sample_size(std::span<const double>(trace.data(), trace.size()))
                                             : 0.0;
                double acc = 0.0;
                for (const double a : chains.front().acceptance_rates) {
                    acc += a;
                }
                cell["acceptance_rate"] = acc / static_cast<double>(chains.front().acceptance_rates.size());
                write_json_atomic(cell_dir / "mpm.json",
                                  mpm_to_json(fit, inputs.train[r].feature_names, model.partition()));
            } catch (const std::exception& e) {
                cell["ok"] = false;
                cell["error"] = e.what();
            }
            write_json_atomic(cell_dir / "metrics.json", cell);
        }
    };
    unsigned workers = options.workers > 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(total, 1)));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    return collect_study(out_dir);
}

StudyResult collect_study(const fs::path& out_dir) {
    const json plan = read_json(out_dir / "study.json");
    StudyResult result;
    result.t_star = plan.at("t_star").get<double>();
    const int replicates = plan.at("replicates").get<int>();
    for (int r = 0; r < replicates; ++r) {
        result.km_ibs.push_back(read_json(out_dir / "km" / (replicate_tag(r) + ".json")).at("ibs").get<double>());
    }
    for (const auto& name : plan.at("scenarios").get<std::vector<std::string>>()) {
        for (int r = 0; r < replicates; ++r) {
            const json j = read_json(out_dir / "cells" / name / replicate_tag(r) / "metrics.json");
            StudyCell cell;
            cell.scenario = name;
            cell.replicate = r;
            cell.seed = j.at("seed").get<std::uint64_t>();
            cell.ok = j.at("ok").get<bool>();
            if (!cell.ok) {
                cell.error = j.value("error", "");
            } else {
                cell.sensitivity = optional_from(j.at("sensitivity"));
                cell.specificity = optional_from(j.at("specificity"));
                cell.accuracy = j.at("accuracy").get<double>();
                cell.model_size = j.at("model_size").get<Index>();
                cell.ibs = j.at("ibs").get<double>();
                cell.ess_model_size = j.at("ess_model_size").get<double>();
                cell.acceptance_rate = j.at("acceptance_rate").get<double>();
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

std::vector<ScenarioSummary> summarize_study(const StudyResult& result) {
    std::vector<ScenarioSummary> out;
    for (const auto& cell : result.cells) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.scenario == cell.scenario; });
        if (it == out.end()) {
            out.push_back({});
            out.back().scenario = cell.scenario;
        }
    }
    for (auto& s : out) {
        std::vector<double> sens, spec, acc, size, ibs;
        for (const auto& cell : result.cells) {
            if (cell.scenario != s.scenario || !cell.ok) {
                continue;
            }
            if (cell.sensitivity) {
                sens.push_back(*cell.sensitivity);
            }
            if (cell.specificity) {
                spec.push_back(*cell.specificity);
            }
            acc.push_back(cell.accuracy);
            size.push_back(static_cast<double>(cell.model_size));
            ibs.push_back(cell.ibs);
        }
        s.cells = static_cast<int>(acc.size());
        const auto a = mean_se(sens), b = mean_se(spec), c = mean_se(acc), d = mean_se(ibs);
        s.sensitivity_mean = a.mean;
        s.sensitivity_se = a.se;
        s.specificity_mean = b.mean;
        s.specificity_se = b.se;
        s.accuracy_mean = c.mean;
        s.accuracy_se = c.se;
        s.ibs_mean = d.mean;
        s.ibs_se = d.se;
        s.model_size_mean = mean_se(size).mean;
        s.model_size_median = median(size);
    }
    return out;
}

void write_study_tables(const StudyResult& result, const fs::path& out_dir) {
    const auto summaries = summarize_study(result);
    auto table = [&](const std::vector<ScenarioSummary>& rows) {
        std::ostringstream out;
        out << "scenario,cells,sensitivity,sensitivity_se,specificity,specificity_se,accuracy,accuracy_se,"
               "model_size_mean,model_size_median,ibs,ibs_se\n";
        for (const auto& s : rows) {
            out << s.scenario << ',' << s.cells << ',' << format_double(s.sensitivity_mean) << ','
                << format_double(s.sensitivity_se) << ',' << format_double(s.specificity_mean) << ','
                << format_double(s.specificity_se) << ',' << format_double(s.accuracy_mean) << ','
                << format_double(s.accuracy_se) << ',' << format_double(s.model_size_mean) << ','
                << format_double(s.model_size_median) << ',' << format_double(s.ibs_mean) << ','
                << format_double(s.ibs_se) << '\n';
        }
        return out.str();
    };
    std::vector<ScenarioSummary> study_one;
    for (const auto& name : study_one_scenarios()) {
        for (const auto& s : summaries) {
            if (s.scenario == name) {
                study_one.push_back(s);
            }
        }
    }
    write_text_atomic(out_dir / "table1.csv", table(study_one));
    write_text_atomic(out_dir / "table2.csv", table(summaries));

    std::ostringstream ibs;
    std::ostringstream size;
    ibs << "scenario,replicate,ibs\n";
    size << "scenario,replicate,model_size\n";
    for (std::size_t r = 0; r < result.km_ibs.size(); ++r) {
        ibs << "kaplan-meier," << r + 1 << ',' << format_double(result.km_ibs[r]) << '\n';
    }
    for (const auto& cell : result.cells) {
        if (!cell.ok) {
            continue;
        }
        ibs << cell.scenario << ',' << cell.replicate + 1 << ',' << format_double(cell.ibs) << '\n';
        size << cell.scenario << ',' << cell.replicate + 1 << ',' << cell.model_size << '\n';
    }
    write_text_atomic(out_dir / "ibs.csv", ibs.str());
    write_text_atomic(out_dir / "model_size.csv", size.str());
}

} // namespace mrfcox
