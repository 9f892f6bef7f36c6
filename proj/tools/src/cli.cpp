#include "scpkit_cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scpkit/classify.hpp"
#include "scpkit/closedform.hpp"
#include "scpkit/errors.hpp"
#include "scpkit/montecarlo.hpp"
#include "scpkit/scenario_io.hpp"
#include "scpkit/sweep.hpp"
#include "scpkit/verify.hpp"

namespace scp::cli {
namespace {

using Json = nlohmann::ordered_json;

// Writes to --out when given, otherwise to the command's stdout.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("--out: cannot write '" + path + "'");
    file << text;
}

EveGeometry parse_mode(const std::string& mode) {
    if (mode == "common") return EveGeometry::common_distance;
    if (mode == "exact") return EveGeometry::exact;
    throw InputError("--mode: expected common or exact");
}

struct EvalArgs {
    std::string scenario;
    std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario scenario = load_scenario(a.scenario);
    const ScpReport report = evaluate_closed_forms(scenario);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    emit(report_to_json(report), a.out, out);
    return kExitOk;
}

struct McArgs {
    std::string scenario;
    std::string out;
    std::uint64_t trials = 100000;
    std::optional<std::uint64_t> seed;
    std::string mode = "common";
    unsigned threads = 0;
};

int cmd_mc(const McArgs& a, std::ostream& out, std::ostream&) {
    const Scenario scenario = load_scenario(a.scenario);
    McConfig config;
    config.trials = a.trials;
    config.seed = a.seed.value_or(scenario.seed);
    config.geometry = parse_mode(a.mode);
    config.threads = a.threads;
    try {
        config.validate();
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
    emit(estimate_to_json(estimate_scp(scenario, config), config), a.out, out);
    return kExitOk;
}

struct SweepArgs {
    std::string scenario;
    std::string sweep;
    std::string out;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::string mode;
    unsigned threads = 0;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream&) {
    const Scenario scenario = load_scenario(a.scenario);
    SweepSpec spec = sweep_spec_from_json(read_text_file(a.sweep));
    if (!a.mode.empty()) spec.geometry = parse_mode(a.mode);
    SweepOptions options;
    options.threads = a.threads;
    options.trials_override = a.trials;
    options.seed_override = a.seed;
    std::ostringstream csv;
    write_sweep_csv(csv, run_sweep(scenario, spec, options));
    emit(csv.str(), a.out, out);
    return kExitOk;
}

struct FitArgs {
    std::string scenario;
    std::string out;
    int study = 0;
    std::optional<std::uint64_t> seed;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario scenario = load_scenario(a.scenario);
    Json root;
    root["layers"] = Json::array();
    std::ostringstream csv;
    csv << std::setprecision(17);
    if (a.study > 0) {
        csv << "layer,grid_x,mean_abs_error\n";
    } else {
        csv << "layer,grid_x,product,collapsed,abs_error\n";
    }

    for (const auto& group : scenario.group_by_layer()) {
        const GammaSurrogate surrogate = moment_match(group.hops);
        const MarcumCollapse collapse = fit_marcum_a_hat(group.hops, group.layer);
        std::vector<std::string> warnings;
        if (collapse.a_hat == 0.0) {
            warnings.push_back("a_hat is 0 (Rayleigh regime): the Rician coefficient is singular, use the "
                               "Erlang or Rayleigh baseline");
        }
        if (collapse.upper_bracket_hit) warnings.push_back("a_hat fit hit the upper search bracket");
        if (collapse.grid_truncated) warnings.push_back("Marcum product does not span the fitting grid");
        for (const auto& w : warnings) err << "warning: layer '" << group.layer.id.value << "': " << w << '\n';
        root["layers"].push_back(Json::parse(fit_to_json(group.layer.id, surrogate, collapse, warnings)));

        if (a.study > 0) {
            RandomStream rng = make_stream(a.seed.value_or(scenario.seed), 0x66697400ULL);
            const MarcumErrorCurve curve = marcum_product_error(group.layer, a.study, HopCountRange{}, rng);
            root["layers"].back()["study_trials"] = a.study;
            root["layers"].back()["study_max_mean_abs_error"] = curve.max_mean_abs_error;
            for (std::size_t g = 0; g < curve.grid.size(); ++g) {
                csv << group.layer.id.value << ',' << curve.grid[g] << ',' << curve.mean_abs_error[g] << '\n';
            }
        } else {
            const MarcumCurves curves = marcum_curves(group.hops, group.layer, collapse.a_hat);
            for (std::size_t g = 0; g < curves.grid.size(); ++g) {
                csv << group.layer.id.value << ',' << curves.grid[g] << ',' << curves.exact[g] << ','
                    << curves.collapsed[g] << ',' << std::abs(curves.exact[g] - curves.collapsed[g]) << '\n';
            }
        }
    }
    out << root.dump(2) << '\n';
    if (!a.out.empty()) emit(csv.str(), a.out, out);
    return kExitOk;
}

struct VerifyArgs {
    std::uint64_t seed = 1;
    std::uint64_t samples = 1000000;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream&) {
    const auto rows = default_verification(a.seed, a.samples);
    std::size_t failed = 0;
    out << std::left << std::setw(8) << "check" << std::setw(52) << "parameters" << std::setw(14) << "value"
        << std::setw(14) << "bound" << "status\n";
    for (const auto& row : rows) {
        char value[32];
        char bound[32];
        std::snprintf(value, sizeof value, "%.4e", row.value);
        std::snprintf(bound, sizeof bound, "%.4e", row.bound);
        out << std::setw(8) << row.check << std::setw(52) << row.parameters << std::setw(14) << value
            << std::setw(14) << bound << (row.pass ? "pass" : "FAIL") << '\n';
        if (!row.pass) ++failed;
    }
    out << rows.size() - failed << '/' << rows.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitNumerical;
}

struct ClassifyArgs {
    std::string nodes;
    std::string edges;
    std::string source;
    std::string scenario;
    std::string out;
    std::string format = "csv";
    double threshold = 0.99;
    double density = 1e-14;
    int hop_bound = 7;
    int beam = 4;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream&) {
    const NodeDataset dataset = parse_node_dataset(read_text_file(a.nodes), read_text_file(a.edges));
    std::vector<Layer> layers = a.scenario.empty() ? testbed_layers(a.density) : load_scenario(a.scenario).layers;
    ClassifyOptions options;
    options.source = a.source;
    options.threshold = a.threshold;
    options.hop_bound = a.hop_bound;
    options.beam = a.beam;
    const auto rows = classify_nodes(dataset, layers, options);
    if (a.format == "json") {
        emit(classification_to_json(rows, options), a.out, out);
    } else if (a.format == "csv") {
        std::ostringstream csv;
        write_classification_csv(csv, rows);
        emit(csv.str(), a.out, out);
    } else {
        throw InputError("--format: expected csv or json");
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Secure connection probability of multi-hop routes in multi-layer networks", "scp"};
    app.require_subcommand(1);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Closed-form SCP of a scenario (JSON)");
    eval_cmd->add_option("scenario", eval.scenario, "Scenario JSON file")->required();
    eval_cmd->add_option("--out", eval.out, "Write JSON here instead of stdout");

    McArgs mc;
    auto* mc_cmd = app.add_subcommand("mc", "Monte-Carlo SCP estimate (JSON)");
    mc_cmd->add_option("scenario", mc.scenario, "Scenario JSON file")->required();
    mc_cmd->add_option("--trials", mc.trials, "Number of trials");
    mc_cmd->add_option("--seed", mc.seed, "Seed (defaults to the scenario seed)");
    mc_cmd->add_option("--mode", mc.mode, "Eavesdropper geometry: common or exact");
    mc_cmd->add_option("--threads", mc.threads, "Worker threads (0 = all cores)");
    mc_cmd->add_option("--out", mc.out, "Write JSON here instead of stdout");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep (CSV)");
    sweep_cmd->add_option("scenario", sweep.scenario, "Scenario JSON file")->required();
    sweep_cmd->add_option("sweep", sweep.sweep, "Sweep JSON file")->required();
    sweep_cmd->add_option("--out", sweep.out, "Write CSV here instead of stdout");
    sweep_cmd->add_option("--trials", sweep.trials, "Monte-Carlo trials per point");
    sweep_cmd->add_option("--seed", sweep.seed, "Seed (defaults to the scenario seed)");
    sweep_cmd->add_option("--mode", sweep.mode, "Eavesdropper geometry: common or exact");
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Marcum collapse fit per layer");
    fit_cmd->add_option("scenario", fit.scenario, "Scenario JSON file")->required();
    fit_cmd->add_option("--out", fit.out, "Write the curve CSV here");
    fit_cmd->add_option("--study", fit.study, "Run the random-route error study with this many routes per layer");
    fit_cmd->add_option("--seed", fit.seed, "Seed for the error study");

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Numerical checks of the lemma identities");
    verify_cmd->add_option("--seed", verify.seed, "Seed for the sampled checks");
    verify_cmd->add_option("--samples", verify.samples, "Samples per sampled check");

    ClassifyArgs classify;
    auto* classify_cmd = app.add_subcommand("classify", "Per-node secure reachability from a source");
    classify_cmd->add_option("nodes", classify.nodes, "Nodes CSV (id,layer,lat,lon,alt)")->required();
    classify_cmd->add_option("--edges", classify.edges, "Adjacency CSV (id_a,id_b)")->required();
    classify_cmd->add_option("--source", classify.source, "Source node id")->required();
    classify_cmd->add_option("--threshold", classify.threshold, "SCP threshold");
    classify_cmd->add_option("--hop-bound", classify.hop_bound, "Maximum hops per route");
    classify_cmd->add_option("--beam", classify.beam, "Search labels kept per node");
    classify_cmd->add_option("--scenario", classify.scenario, "Take layer parameters from this scenario file");
    classify_cmd->add_option("--density", classify.density,
                             "Eavesdropper density per m^2 for the built-in layers");
    classify_cmd->add_option("--format", classify.format, "csv or json");
    classify_cmd->add_option("--out", classify.out, "Write output here instead of stdout");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
        if (mc_cmd->parsed()) return cmd_mc(mc, out, err);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep, out, err);
        if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
        if (verify_cmd->parsed()) return cmd_verify(verify, out, err);
        if (classify_cmd->parsed()) return cmd_classify(classify, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitInput;
}

}  // namespace scp::cli
