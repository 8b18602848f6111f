#include "flexlink/errors.hpp"
#include "flexlink/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace flexlink;

constexpr int kExitSettled = 0;
constexpr int kExitUnsettled = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitConfigInvalid = 4;

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir = ".";
    double dt_override = 0.0;
    bool theory_mode = false;
    bool plot = false;
};

PreparedScenario load_with_overrides(const CommonOpts& opts) {
    PreparedScenario prep = load_scenario_file(opts.scenario_path);
    if (opts.dt_override > 0.0) prep.scenario.sim.dt = opts.dt_override;
    if (opts.theory_mode) prep.scenario.sim.theory_mode = true;
    return prep;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::binary);
    out << doc.dump(2) << "\n";
}

int run_once(const PreparedScenario& prep, const CommonOpts& opts,
             ControllerSelect which, const std::string& stem,
             nlohmann::json* summary_out = nullptr) {
    SimConfig cfg = prep.scenario.sim;
    cfg.controller = which;
    const SimTrace trace = run_scenario(cfg, prep.systems, prep.gains);
    const nlohmann::json summary = summarize_run(prep, trace, which);

    fs::create_directories(opts.out_dir);
    const fs::path base = fs::path(opts.out_dir);
    write_trace_csv((base / (stem + "_trace.csv")).string(), trace, prep.hash);
    write_json(base / (stem + "_summary.json"), summary);
    if (opts.plot)
        write_plot_script((base / (stem + "_plot.gp")).string(), stem + "_trace.csv",
                          prep.hash);
    if (summary_out) *summary_out = summary;
    return summary.at("status") == "settled" ? kExitSettled : kExitUnsettled;
}

void print_run_summary(const nlohmann::json& summary) {
    const auto& tip = summary.at("metrics").at("tip");
    const auto& joint = summary.at("metrics").at("joint");
    std::printf("controller        : %s\n", summary.at("controller").get<std::string>().c_str());
    std::printf("status            : %s\n", summary.at("status").get<std::string>().c_str());
    std::printf("tip settling      : %.4f s\n", tip.at("settling_time").get<double>());
    std::printf("joint settling    : %.4f s\n", joint.at("settling_time").get<double>());
    std::printf("tip overshoot     : %.3f %%\n", tip.at("overshoot_pct").get<double>());
    std::printf("tip steady RMS    : %.3e rad\n", tip.at("steady_state_rms").get<double>());
    std::printf("joint steady RMS  : %.3e rad\n", joint.at("steady_state_rms").get<double>());
}

int cmd_run(const CommonOpts& opts) {
    const PreparedScenario prep = load_with_overrides(opts);
    nlohmann::json summary;
    const int code = run_once(prep, opts, prep.scenario.sim.controller, "run", &summary);
    print_run_summary(summary);
    std::printf("artifacts         : %s/run_trace.csv, %s/run_summary.json\n",
                opts.out_dir.c_str(), opts.out_dir.c_str());
    return code;
}

int cmd_bounds(const CommonOpts& opts) {
    const PreparedScenario prep = load_with_overrides(opts);
    const SettlingBounds& b = prep.controller_bounds;
    std::printf("stage        plain [s]    lyapunov [s]\n");
    for (int i = 0; i < 4; ++i)
        std::printf("T_%d          %-12.6g %-12.6g\n", i, b.stage[i], b.stage_lyapunov[i]);
    std::printf("T_ctrl       %-12.6g %-12.6g\n", b.total, b.total_lyapunov);
    std::printf("T_ftsmo      %-12.6g\n", prep.observer_bound);
    std::printf("T_total      %-12.6g\n", prep.hierarchy.t_total);
    std::printf("hierarchy    %s (T_ftsmo < T_ctrl %s)\n",
                prep.hierarchy.ok ? "ok" : "VIOLATED",
                prep.hierarchy.ok ? "holds" : "fails");
    return kExitSettled;
}

int cmd_compare(const CommonOpts& opts) {
    const PreparedScenario prep = load_with_overrides(opts);
    nlohmann::json proposed, pd;
    const int code_prop = run_once(prep, opts, ControllerSelect::proposed, "proposed", &proposed);
    const int code_pd = run_once(prep, opts, ControllerSelect::pd, "pd", &pd);

    nlohmann::json doc{{"scenario_hash", prep.hash},
                       {"proposed", proposed},
                       {"pd", pd}};
    write_json(fs::path(opts.out_dir) / "compare.json", doc);

    auto row = [](const char* name, const nlohmann::json& s) {
        const auto& tip = s.at("metrics").at("tip");
        const auto& joint = s.at("metrics").at("joint");
        std::printf("%-9s %9.3f %9.3f %12.3e %12.3e %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f\n",
                    name, tip.at("settling_time").get<double>(),
                    joint.at("settling_time").get<double>(),
                    tip.at("steady_state_rms").get<double>(),
                    joint.at("steady_state_rms").get<double>(),
                    tip.at("ise").get<double>(), tip.at("iae").get<double>(),
                    tip.at("itse").get<double>(), tip.at("itae").get<double>(),
                    joint.at("ise").get<double>(), joint.at("iae").get<double>(),
                    joint.at("itse").get<double>(), joint.at("itae").get<double>());
    };
    std::printf("%-9s %9s %9s %12s %12s %8s %8s %8s %8s %8s %8s %8s %8s\n", "scheme",
                "Ts_tip", "Ts_joint", "ss_tip", "ss_joint", "ISE_t", "IAE_t", "ITSE_t",
                "ITAE_t", "ISE_j", "IAE_j", "ITSE_j", "ITAE_j");
    row("proposed", proposed);
    row("pd", pd);
    return std::max(code_prop, code_pd);
}

int cmd_sweep(const CommonOpts& opts, const std::string& scales_arg) {
    const PreparedScenario prep = load_with_overrides(opts);
    std::vector<double> scales;
    std::stringstream ss(scales_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) scales.push_back(std::stod(item));
    }
    if (scales.empty()) throw ConfigError("--scales: expected a comma-separated list");

    const SweepReport report =
        sweep_initial_conditions(prep.scenario.sim, prep.systems, prep.gains, scales);
    fs::create_directories(opts.out_dir);
    write_json(fs::path(opts.out_dir) / "sweep.json", sweep_to_json(report, prep.hash));

    std::printf("%10s %10s %10s %14s\n", "scale", "status", "Ts_tip", "within_bound");
    for (const auto& row : report.rows) {
        const char* status = row.diverged ? "diverged" : (row.settled ? "settled" : "unsettled");
        std::printf("%10g %10s %10.4f %14s%s\n", row.scale, status, row.settling_tip,
                    row.within_bound ? "yes" : "NO", row.mirrored ? "  (mirrored IC)" : "");
    }
    std::printf("T_total bound: %.4f s; all within: %s\n", report.t_total_bound,
                report.all_within_bound ? "yes" : "NO");
    bool any_diverged = false, all_settled = true;
    for (const auto& row : report.rows) {
        any_diverged |= row.diverged;
        all_settled &= row.settled;
    }
    if (any_diverged) return kExitDiverged;
    return all_settled ? kExitSettled : kExitUnsettled;
}

int cmd_validate(const CommonOpts& opts, const std::string& export_dir) {
    const PreparedScenario prep = load_with_overrides(opts);
    const QReport& q = prep.q_report;
    std::printf("schema            : ok\n");
    std::printf("observability rank: %d (smallest sv %.3e)\n", q.observability_rank,
                q.observability_smallest_sv);
    std::printf("Q eigenvalues     :");
    for (int i = 0; i < q.q_eigenvalues.size(); ++i)
        std::printf(" %.4g", q.q_eigenvalues(i));
    std::printf("\n");
    std::printf("Q psd (full space): %s\n", q.q_positive_semidefinite ? "yes" : "no");
    std::printf("Q pd on range(C^T): %s\n", q.q_definite_on_output_subspace ? "yes" : "no");
    std::printf("A_C - L C_C       : %s\n", q.closed_loop_hurwitz ? "Hurwitz" : "NOT Hurwitz");
    std::printf("T condition       : %.4g%s\n", prep.systems.canon.t_condition,
                prep.systems.canon.t_condition > kTransformConditionWarn
                    ? "  (WARNING: exceeds 1e8)" : "");
    std::printf("T_ftsmo / T_ctrl  : %.4g / %.4g (hierarchy %s)\n", prep.observer_bound,
                prep.controller_bounds.total, prep.hierarchy.ok ? "ok" : "VIOLATED");

    if (!export_dir.empty()) {
        fs::create_directories(export_dir);
        const fs::path base(export_dir);
        auto dump_matrix = [&](const char* name, const Eigen::MatrixXd& mat) {
            std::ofstream out(base / (std::string(name) + ".csv"), std::ios::binary);
            write_matrix_csv(out, mat);
        };
        dump_matrix("A", prep.systems.truth.A);
        dump_matrix("B", prep.systems.truth.B);
        dump_matrix("C", prep.systems.truth.C);
        write_json(base / "canonical.json", canonical_to_json(prep.systems.canon));
        write_json(base / "plant.json",
                   nlohmann::json{{"beam", beam_to_json(prep.scenario.beam)},
                                  {"modal_overrides",
                                   modal_overrides_to_json(prep.scenario.modal_overrides)}});
        std::printf("exported matrices : %s\n", export_dir.c_str());
    }
    return q.gains_ok() ? kExitSettled : kExitConfigInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flexlink: flexible-link manipulator control simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string scales_arg = "1,10,100";
    std::string export_dir;

    auto add_common = [&](CLI::App* cmd, bool with_out = true) {
        cmd->add_option("scenario", opts.scenario_path, "scenario JSON file")
            ->required()
            ->check(CLI::ExistingFile);
        if (with_out) cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--dt", opts.dt_override, "override integration step");
        cmd->add_flag("--theory-mode", opts.theory_mode,
                      "pure sign functions, no saturation");
    };

    CLI::App* run = app.add_subcommand("run", "simulate one scenario");
    add_common(run);
    run->add_flag("--plot", opts.plot, "emit a gnuplot script");

    CLI::App* bounds = app.add_subcommand("bounds", "print analytic settling bounds");
    add_common(bounds, false);

    CLI::App* compare = app.add_subcommand("compare", "proposed vs PD on one scenario");
    add_common(compare);
    compare->add_flag("--plot", opts.plot, "emit gnuplot scripts");

    CLI::App* sweep = app.add_subcommand("sweep", "initial-condition sweep");
    add_common(sweep);
    sweep->add_option("--scales", scales_arg, "comma-separated IC scales");

    CLI::App* validate = app.add_subcommand("validate", "check gains and report diagnostics");
    add_common(validate, false);
    validate->add_option("--export", export_dir, "directory for matrix/plant exports");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opts);
        if (bounds->parsed()) return cmd_bounds(opts);
        if (compare->parsed()) return cmd_compare(opts);
        if (sweep->parsed()) return cmd_sweep(opts, scales_arg);
        if (validate->parsed()) return cmd_validate(opts, export_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigInvalid;
    } catch (const DivergedError& e) {
        std::fprintf(stderr, "diverged: %s\n", e.what());
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfigInvalid;
    }
    return kExitConfigInvalid;
}
