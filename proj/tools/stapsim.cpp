// Batch simulator CLI: Monte-Carlo BER experiments for the reduced-rank
// space-time receiver plus analytic complexity sweeps.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rrstap/complexity.hpp"
#include "rrstap/harness.hpp"

using namespace rrstap;

namespace {

struct CommonArgs {
    std::string config;
    std::string out_dir = ".";
    std::string estimator;
    std::string selector;
    std::vector<double> values;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    int runs = 0;
    int threads = -1;
    bool track_ses = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "key = value config file");
    cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", args.seed, "master seed (64-bit)");
    cmd->add_option("--runs", args.runs, "Monte-Carlo runs");
    cmd->add_option("--estimator", args.estimator,
                    "estimator (comma list allowed for ber-vs-symbols)");
    cmd->add_option("--rank-selector", args.selector,
                    "rank selector: extended|multiple|stopping|cv");
    cmd->add_option("--values", args.values, "sweep values override")->delimiter(',');
    cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
    cmd->add_option("--set", args.sets, "override any config key, e.g. --set alpha=0.95")
        ->delimiter(';');
    cmd->add_flag("--track-ses", args.track_ses, "record weighted-cost trajectories");
}

ExperimentSpec build_spec(const CommonArgs& args) {
    ExperimentSpec spec;
    if (!args.config.empty()) spec = load_spec(args.config, spec);
    for (const std::string& kv : args.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_key(spec, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed != 0) spec.seed = args.seed;
    if (args.runs != 0) spec.runs = args.runs;
    if (args.threads >= 0) spec.threads = args.threads;
    if (args.track_ses) spec.track_ses = true;
    if (!args.selector.empty()) spec.selector = selector_from_string(args.selector);
    return spec;
}

void write_outputs(const RunResult& result, const std::string& out_dir, const std::string& stem) {
    std::filesystem::create_directories(out_dir);
    const std::string csv = out_dir + "/" + stem + ".csv";
    const std::string dat = out_dir + "/" + stem + ".dat";
    emit_csv(result, csv);
    emit_plotdata(result, dat);
    std::cout << stem << ": wrote " << csv << " and " << dat << "\n";
    for (const SweepResult& s : result.sweeps)
        std::cout << "  " << s.label << ": ber=" << s.ber << " (+-" << s.ber_halfwidth
                  << ", bits=" << s.bits << ", failed_runs=" << s.failed_runs << ")\n";
}

std::vector<EstimatorKind> parse_estimators(const std::string& csv) {
    std::vector<EstimatorKind> kinds;
    std::string item;
    std::stringstream ss(csv);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) kinds.push_back(estimator_from_string(item));
    }
    return kinds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced-rank space-time receiver simulator"};
    app.require_subcommand(1);

    CommonArgs rank_args, sym_args, fdt_args, snr_args, users_args;

    auto* cmd_rank = app.add_subcommand("ber-vs-rank", "BER against projection rank D");
    add_common(cmd_rank, rank_args);

    auto* cmd_sym = app.add_subcommand("ber-vs-symbols", "BER convergence against received symbols");
    add_common(cmd_sym, sym_args);

    auto* cmd_fdt = app.add_subcommand("ber-vs-fdt", "BER against normalized Doppler");
    add_common(cmd_fdt, fdt_args);

    auto* cmd_snr = app.add_subcommand("ber-vs-snr", "BER against Eb/N0");
    add_common(cmd_snr, snr_args);

    auto* cmd_users = app.add_subcommand("ber-vs-users", "BER against user count");
    add_common(cmd_users, users_args);

    auto* cmd_cx = app.add_subcommand("complexity", "analytic cost sweep (CSV on stdout or --out)");
    std::string cx_range = "8:80:8";
    int cx_d = 4;
    std::string cx_out;
    cmd_cx->add_option("--jm-range", cx_range, "JM sweep as start:stop:step or comma list")
        ->capture_default_str();
    cmd_cx->add_option("--d", cx_d, "rank D")->capture_default_str();
    cmd_cx->add_option("--out", cx_out, "output CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_rank->parsed()) {
            ExperimentSpec spec = build_spec(rank_args);
            if (!rank_args.values.empty()) {
                spec.axis = SweepAxis::rank;
                spec.sweep_values = rank_args.values;
                spec.estimator = EstimatorKind::jio_rls;
                write_outputs(run_experiment(spec), rank_args.out_dir, "ber-vs-rank");
            } else {
                write_outputs(ber_vs_rank(spec), rank_args.out_dir, "ber-vs-rank");
            }
        } else if (cmd_sym->parsed()) {
            ExperimentSpec spec = build_spec(sym_args);
            spec.axis = SweepAxis::estimator;
            spec.estimator_values = sym_args.estimator.empty()
                                        ? std::vector<EstimatorKind>{EstimatorKind::full_rank_rls,
                                                                     EstimatorKind::jio_rls,
                                                                     EstimatorKind::jio_rls_autorank}
                                        : parse_estimators(sym_args.estimator);
            write_outputs(run_experiment(spec), sym_args.out_dir, "ber-vs-symbols");
        } else if (cmd_fdt->parsed()) {
            ExperimentSpec spec = build_spec(fdt_args);
            if (!fdt_args.estimator.empty()) spec.estimator = estimator_from_string(fdt_args.estimator);
            spec.axis = SweepAxis::doppler;
            spec.sweep_values = fdt_args.values.empty()
                                    ? std::vector<double>{1e-4, 3e-4, 1e-3, 3e-3, 1e-2}
                                    : fdt_args.values;
            write_outputs(run_experiment(spec), fdt_args.out_dir, "ber-vs-fdt");
        } else if (cmd_snr->parsed()) {
            ExperimentSpec spec = build_spec(snr_args);
            if (!snr_args.estimator.empty()) spec.estimator = estimator_from_string(snr_args.estimator);
            spec.axis = SweepAxis::snr;
            spec.sweep_values = snr_args.values.empty()
                                    ? std::vector<double>{0, 2, 4, 6, 8, 10, 12, 14, 16}
                                    : snr_args.values;
            write_outputs(run_experiment(spec), snr_args.out_dir, "ber-vs-snr");
        } else if (cmd_users->parsed()) {
            ExperimentSpec spec = build_spec(users_args);
            if (!users_args.estimator.empty())
                spec.estimator = estimator_from_string(users_args.estimator);
            spec.axis = SweepAxis::users;
            spec.sweep_values = users_args.values.empty()
                                    ? std::vector<double>{2, 4, 6, 8, 10, 12, 14, 16}
                                    : users_args.values;
            write_outputs(run_experiment(spec), users_args.out_dir, "ber-vs-users");
        } else if (cmd_cx->parsed()) {
            std::vector<int> jms;
            if (cx_range.find(':') != std::string::npos) {
                int start, stop, step;
                if (std::sscanf(cx_range.c_str(), "%d:%d:%d", &start, &stop, &step) != 3 || step <= 0)
                    throw ConfigError("complexity: bad --jm-range '" + cx_range + "'");
                for (int jm = start; jm <= stop; jm += step) jms.push_back(jm);
            } else {
                std::stringstream ss(cx_range);
                std::string item;
                while (std::getline(ss, item, ',')) jms.push_back(std::stoi(item));
            }
            std::ostream* os = &std::cout;
            std::ofstream file;
            if (!cx_out.empty()) {
                file.open(cx_out);
                if (!file) throw Error("complexity: cannot write '" + cx_out + "'");
                os = &file;
            }
            *os << "jm,algorithm,additions,multiplications\n";
            for (const CostSample& s : cost_sweep(jms, cx_d))
                *os << s.jm << "," << s.algorithm << "," << s.cost.additions << ","
                    << s.cost.multiplications << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
