#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hiermc/dataset_io.hpp"
#include "hiermc/door.hpp"
#include "hiermc/figures.hpp"
#include "hiermc/gpc.hpp"
#include "hiermc/most.hpp"
#include "hiermc/parallel.hpp"
#include "hiermc/report.hpp"
#include "hiermc/rng.hpp"
#include "hiermc/simulator.hpp"

namespace hiermc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code(ErrorCode code) {
    switch (category_of(code)) {
        case ErrorCategory::Config: return 2;
        case ErrorCategory::Data: return 3;
        case ErrorCategory::Numerical: return 4;
    }
    return 2;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
    f << text;
}

struct DataArgs {
    std::string data;
    std::string descriptor;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("--data", a.data, "Long-format CSV (patient_id,arm,day,state)")->required();
    cmd->add_option("--descriptor", a.descriptor, "Dataset descriptor JSON (default: CSV path with .json)");
}

struct LoadedData {
    DatasetDescriptor descriptor;
    TrialDataset data;
};

LoadedData load(const DataArgs& a) {
    const fs::path desc = a.descriptor.empty() ? descriptor_path_for(a.data) : fs::path(a.descriptor);
    LoadedData l;
    l.descriptor = read_descriptor(desc);
    l.data = read_dataset_csv(fs::path(a.data), l.descriptor);
    return l;
}

struct OutputArgs {
    std::string out;
    std::string format = "json";
};

void add_output_options(CLI::App* cmd, OutputArgs& o, bool tables) {
    cmd->add_option("--out", o.out, "Output file (default: stdout)");
    if (tables)
        cmd->add_option("--format", o.format, "json, csv or text")
            ->check(CLI::IsMember({"json", "csv", "text"}));
    else
        cmd->add_option("--format", o.format, "json")->check(CLI::IsMember({"json"}));
}

void emit(const AnalysisReport& report, const OutputArgs& o, std::ostream& out) {
    std::string text;
    if (o.format == "csv")
        text = table_csv(report);
    else if (o.format == "text")
        text = table_text(report);
    else
        text = report.serialize();
    write_text(o.out, text, out);
}

struct InferenceArgs {
    double alpha = 0.05;
    std::string sided = "two-sided";
};

void add_inference_options(CLI::App* cmd, InferenceArgs& a) {
    cmd->add_option("--alpha", a.alpha, "Significance level")->check(CLI::Range(1e-12, 0.999999));
    cmd->add_option("--sided", a.sided, "two-sided or greater")->check(CLI::IsMember({"two-sided", "greater"}));
}

AnalysisOptions options_from(const InferenceArgs& a) {
    AnalysisOptions o;
    o.alpha = a.alpha;
    o.sided = a.sided == "greater" ? Sidedness::Greater : Sidedness::TwoSided;
    return o;
}

json inference_config(const InferenceArgs& a) { return {{"alpha", a.alpha}, {"sided", a.sided}}; }

void print_error(std::ostream& err, ErrorCode code, const std::string& message,
                 const std::vector<Violation>* violations = nullptr) {
    json j{{"error", to_string(code)}, {"message", message}};
    if (violations) {
        json v = json::array();
        for (const auto& x : *violations)
            v.push_back({{"patient_id", x.patient_id}, {"day", x.day}, {"rule", to_string(x.rule)},
                         {"message", x.message}});
        j["violations"] = v;
    }
    err << j.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    parallel::configure_from_env();

    CLI::App app{"Hierarchical composite endpoint analysis"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a two-arm trial from a ground-truth transition model");
    std::string sim_config, sim_out;
    std::uint64_t sim_seed = 0;
    sim->add_option("--config", sim_config, "Simulation config JSON")->required();
    sim->add_option("--seed", sim_seed, "Master seed")->required();
    sim->add_option("--out", sim_out, "Output CSV; the descriptor is written beside it")->required();

    // gpc
    auto* gpc = app.add_subcommand("gpc", "Generalized pairwise comparison");
    DataArgs gpc_data;
    OutputArgs gpc_out;
    InferenceArgs gpc_inf;
    std::string gpc_rule;
    add_data_options(gpc, gpc_data);
    add_output_options(gpc, gpc_out, true);
    add_inference_options(gpc, gpc_inf);
    gpc->add_option("--rule", gpc_rule, "Comparison rule JSON (default: death, home, vfd with tau 3)");

    // wmw
    auto* wmw = app.add_subcommand("wmw", "Conventional Wilcoxon-Mann-Whitney on ventilator-free days");
    DataArgs wmw_data;
    OutputArgs wmw_out;
    InferenceArgs wmw_inf;
    add_data_options(wmw, wmw_data);
    add_output_options(wmw, wmw_out, true);
    add_inference_options(wmw, wmw_inf);

    // door
    auto* door = app.add_subcommand("door", "Desirability of outcome ranking");
    DataArgs door_data;
    OutputArgs door_out;
    InferenceArgs door_inf;
    std::string door_spec, door_scale = "probability";
    add_data_options(door, door_data);
    add_output_options(door, door_out, true);
    add_inference_options(door, door_inf);
    door->add_option("--spec", door_spec, "DOOR category spec JSON (default: built-in seven categories)");
    door->add_option("--ci-scale", door_scale, "probability or logit")
        ->check(CLI::IsMember({"probability", "logit"}));

    // ldoor
    auto* ldoor = app.add_subcommand("ldoor", "Longitudinal DOOR over daily states");
    DataArgs ldoor_data;
    OutputArgs ldoor_out;
    std::string ldoor_weights = "uniform";
    add_data_options(ldoor, ldoor_data);
    add_output_options(ldoor, ldoor_out, false);
    ldoor->add_option("--weights", ldoor_weights, "'uniform' or a file with one weight per day");

    // most
    auto* most = app.add_subcommand("most", "Multistate ordinal transition model");
    DataArgs most_data;
    OutputArgs most_out;
    std::string most_model, most_summary = "unwell:1,2,3";
    int most_boot = 0, most_baseline = 0;
    double most_alpha = 0.05;
    std::optional<std::uint64_t> most_seed;
    add_data_options(most, most_data);
    add_output_options(most, most_out, false);
    most->add_option("--model", most_model, "Model spec JSON (default: all terms, previous-state reference 2)");
    most->add_option("--summary", most_summary, "Down-set of states counted as unwell, e.g. unwell:1,2,3");
    most->add_option("--bootstrap", most_boot, "Number of bootstrap replicates")->check(CLI::NonNegativeNumber);
    most->add_option("--seed", most_seed, "Bootstrap seed (required with --bootstrap)");
    most->add_option("--baseline", most_baseline, "Day-0 state for occupancy (default: descriptor baseline)");
    most->add_option("--alpha", most_alpha, "Percentile interval level")->check(CLI::Range(1e-12, 0.999999));

    // report
    auto* rep = app.add_subcommand("report", "Render tables or figures from a saved report");
    std::string rep_in, rep_svg, rep_format, rep_out;
    rep->add_option("--in", rep_in, "Report JSON")->required();
    rep->add_option("--svg", rep_svg, "Directory for SVG figures");
    rep->add_option("--format", rep_format, "text, csv or json (default: text for tables, json otherwise)")->check(CLI::IsMember({"json", "csv", "text"}));
    rep->add_option("--out", rep_out, "Output file for the table (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        // Help requested on a subcommand.
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        print_error(err, ErrorCode::ConfigError, e.what());
        return 2;
    }

    try {
        if (*sim) {
            const auto config = read_simulation_config(sim_config);
            const auto model = config.model();
            const auto data = simulate_trial(model, config.n_per_arm, config.horizon_days, sim_seed);
            write_dataset_csv(fs::path(sim_out), data);
            DatasetDescriptor d;
            d.scale = config.scale;
            d.horizon_days = config.horizon_days;
            d.baseline_state = config.baseline_state;
            d.seed = sim_seed;
            d.rng_algorithm = std::string(kRngAlgorithm);
            d.rng_version = kRngVersion;
            write_descriptor(descriptor_path_for(sim_out), d);
        } else if (*gpc) {
            const auto l = load(gpc_data);
            const auto rule = gpc_rule.empty() ? ComparisonRule::guiding_example() : rule_from_json(read_json_file(gpc_rule));
            AnalysisReport r;
            r.method = "gpc";
            r.dataset = dataset_summary(l.data);
            r.config = {{"rule", to_json(rule)}, {"inference", inference_config(gpc_inf)}};
            r.result = to_json(gpc_analyze(l.data, rule, options_from(gpc_inf)));
            emit(r, gpc_out, out);
        } else if (*wmw) {
            const auto l = load(wmw_data);
            AnalysisReport r;
            r.method = "wmw";
            r.dataset = dataset_summary(l.data);
            r.config = {{"rule", to_json(ComparisonRule::ventilator_free_days_only())},
                        {"inference", inference_config(wmw_inf)}};
            r.result = to_json(conventional_wmw(l.data, options_from(wmw_inf)));
            emit(r, wmw_out, out);
        } else if (*door) {
            const auto l = load(door_data);
            const auto spec = door_spec.empty() ? guiding_example_spec() : door_spec_from_json(read_json_file(door_spec));
            auto opts = options_from(door_inf);
            opts.ci_scale = door_scale == "logit" ? CiScale::Logit : CiScale::Probability;
            AnalysisReport r;
            r.method = "door";
            r.dataset = dataset_summary(l.data);
            auto inf = inference_config(door_inf);
            inf["ci_scale"] = door_scale;
            r.config = {{"spec", to_json(spec)}, {"inference", inf}};
            r.result = to_json(door_analyze(l.data, spec, opts));
            emit(r, door_out, out);
        } else if (*ldoor) {
            const auto l = load(ldoor_data);
            const auto weights =
                ldoor_weights == "uniform" ? uniform_weights(l.data.horizon_days) : read_weights(ldoor_weights);
            AnalysisReport r;
            r.method = "ldoor";
            r.dataset = dataset_summary(l.data);
            r.config = {{"weights", ldoor_weights == "uniform" ? json("uniform") : json(weights)}};
            r.result = {{"longitudinal", to_json(longitudinal_door(l.data, weights))},
                        {"empirical_sop", empirical_sop_json(l.data)}};
            emit(r, ldoor_out, out);
        } else if (*most) {
            if (most_boot > 0 && !most_seed)
                throw Error(ErrorCode::ConfigError, "--seed is required with --bootstrap");
            const auto l = load(most_data);
            TransitionModelSpec spec;
            spec.scale = l.data.scale;
            if (!most_model.empty()) spec = model_spec_from_json(read_json_file(most_model), l.data.scale);
            spec.validate();
            const auto unwell = parse_unwell_states(most_summary);
            const int baseline = most_baseline > 0 ? most_baseline : l.descriptor.baseline_state;
            if (!l.data.scale.in_range(baseline) || l.data.scale.is_absorbing(baseline))
                throw Error(ErrorCode::ConfigError, "baseline must be a non-absorbing state");

            const auto records = build_transition_records(l.data);
            const auto fit = fit_mle(records, spec);
            if (!fit.converged()) {
                const auto code = fit.status == FitStatus::SeparationSuspected ? ErrorCode::SeparationSuspected
                                                                                 : ErrorCode::NonConvergence;
                throw Error(code, "transition model fit: " + std::string(to_string(fit.status)) +
                                      (fit.message.empty() ? "" : " (" + fit.message + ")"));
            }
            const auto summary = summarize_most(fit, unwell, baseline, l.data.horizon_days);

            AnalysisReport r;
            r.method = "most";
            r.dataset = dataset_summary(l.data);
            r.config = {{"model", to_json(spec)},
                        {"unwell_states", unwell},
                        {"baseline_state", baseline},
                        {"bootstrap_replicates", most_boot},
                        {"alpha", most_alpha}};
            r.result = {{"model", to_json(fit)},
                        {"summary", to_json(summary)},
                        {"empirical_sop", empirical_sop_json(l.data)},
                        {"bootstrap", nullptr}};
            if (most_boot > 0) {
                const auto boot =
                    bootstrap_summary(l.data, spec, unwell, most_boot, *most_seed, baseline, most_alpha);
                r.result["bootstrap"] = to_json(boot);
                r.seeds.push_back(*most_seed);
                if (boot.raw.high_failure_rate())
                    err << json{{"warning", "HIGH_BOOTSTRAP_FAILURE_RATE"},
                                {"failed", boot.raw.failed},
                                {"requested", boot.raw.requested}}
                               .dump()
                        << '\n';
            }
            emit(r, most_out, out);
        } else if (*rep) {
            std::ifstream in(rep_in, std::ios::binary);
            if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + rep_in);
            std::stringstream buf;
            buf << in.rdbuf();
            const auto report = AnalysisReport::parse(buf.str());
            if (!rep_svg.empty()) {
                const auto figures = emit_figures(report);
                fs::create_directories(rep_svg);
                for (const auto& f : figures) write_text((fs::path(rep_svg) / f.filename).string(), f.svg, out);
            } else {
                std::string format = rep_format;
                if (format.empty())
                    format = report.method == "gpc" || report.method == "wmw" || report.method == "door" ? "text" : "json";
                OutputArgs o{rep_out, format};
                emit(report, o, out);
            }
        }
    } catch (const ValidationError& e) {
        print_error(err, e.code(), e.what(), &e.violations());
        return exit_code(e.code());
    } catch (const Error& e) {
        print_error(err, e.code(), e.what());
        return exit_code(e.code());
    } catch (const fs::filesystem_error& e) {
        print_error(err, ErrorCode::ConfigError, e.what());
        return 2;
    }
    return 0;
}

}  // namespace hiermc::cli
