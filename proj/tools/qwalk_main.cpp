// Command-line front end: configure and run walk experiments, cross-validate
// the direct and k-space methods, extract growth laws, and emit plot-ready
// CSV/JSON reproducing the variance-growth figures.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <qwalk/qwalk.hpp>

namespace {

using qwalk::RunConfig;

struct CliOptions {
    std::string config_file;
    std::string mode, method, format, window, initial, out, coin_file;
    int coins = 1;
    double theta = 0.0;
    long steps = 100;
    int kgrid = 0;
    long density_cap = 400;
};

void add_shared_options(CLI::App* cmd, CliOptions& opt, bool with_run_options) {
    cmd->add_option("--config", opt.config_file, "optional key=value config file; flags override it");
    cmd->add_option("--mode", opt.mode, "unitary | dephasing");
    cmd->add_option("--coins", opt.coins, "number of coins M (unitary mode)");
    cmd->add_option("--theta", opt.theta, "dephasing angle in radians, [0, pi/4]");
    cmd->add_option("--initial", opt.initial, "initial coin state: R | L | symmetric | re,im,...");
    cmd->add_option("--kgrid", opt.kgrid, "k-grid node count override (0 = exact default)");
    cmd->add_option("--out", opt.out, "output path (stdout if omitted)");
    cmd->add_option("--coin-file", opt.coin_file, "custom coin spec file");
    if (with_run_options) {
        cmd->add_option("--steps", opt.steps, "number of walk steps");
        cmd->add_option("--method", opt.method, "direct | kspace | both");
        cmd->add_option("--format", opt.format, "csv | json");
        cmd->add_option("--window", opt.window, "fit window LO:HI (default: second half)");
        cmd->add_option("--density-cap", opt.density_cap,
                        "horizon cap for direct density evolution");
    }
}

RunConfig build_config(const CLI::App* cmd, const CliOptions& opt) {
    RunConfig config;
    if (cmd->count("--config") > 0) config = qwalk::config_from_file(opt.config_file);
    if (cmd->count("--mode") > 0) config.mode = qwalk::parse_mode(opt.mode);
    if (cmd->count("--coins") > 0) config.coins = opt.coins;
    if (cmd->count("--theta") > 0) {
        config.theta = opt.theta;
        if (cmd->count("--mode") == 0 && cmd->count("--config") == 0) {
            config.mode = qwalk::RunMode::dephasing;
        }
    }
    if (cmd->count("--initial") > 0) config.initial = opt.initial;
    if (cmd->count("--kgrid") > 0) config.kgrid = opt.kgrid;
    if (cmd->count("--out") > 0) config.out = opt.out;
    if (cmd->count("--coin-file") > 0) config.coin_file = opt.coin_file;
    if (cmd->get_option_no_throw("--steps") && cmd->count("--steps") > 0) config.steps = opt.steps;
    if (cmd->get_option_no_throw("--method") && cmd->count("--method") > 0) {
        config.method = qwalk::parse_method(opt.method);
    }
    if (cmd->get_option_no_throw("--format") && cmd->count("--format") > 0) {
        config.format = qwalk::parse_format(opt.format);
    }
    if (cmd->get_option_no_throw("--window") && cmd->count("--window") > 0) {
        qwalk::parse_window(opt.window, config.window_lo, config.window_hi);
    }
    if (cmd->get_option_no_throw("--density-cap") && cmd->count("--density-cap") > 0) {
        config.density_cap = opt.density_cap;
    }
    return config;
}

int emit_error(const std::string& kind, const std::string& message, const std::string& hint = "") {
    nlohmann::json record{{"error", kind}, {"message", message}};
    if (!hint.empty()) record["hint"] = hint;
    std::cerr << record.dump() << "\n";
    return 1;
}

std::string hint_for(const qwalk::Error& e) {
    if (e.kind() == "GridTooCoarse") {
        return "pass --kgrid N with N >= 2*steps+1, or --kgrid 0 for the exact default";
    }
    if (e.kind() == "WindowOverflow") {
        return "use --method kspace for horizons beyond the density window";
    }
    if (e.kind() == "SingularOnSubspace") {
        return "the resolvent slope breaks down as theta -> 0; use theta > 0 or the direct method";
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coined quantum walks on the line: direct and k-space moments, "
                 "growth-law asymptotics, figure reproduction"};
    app.require_subcommand(1);

    CliOptions sim_opt, asym_opt;
    std::string figure, reproduce_out;

    CLI::App* simulate = app.add_subcommand("simulate", "run a walk and emit per-step moments");
    add_shared_options(simulate, sim_opt, /*with_run_options=*/true);

    CLI::App* asymptote =
        app.add_subcommand("asymptote", "closed-form and numerical long-time growth estimates");
    add_shared_options(asymptote, asym_opt, /*with_run_options=*/false);

    CLI::App* reproduce =
        app.add_subcommand("reproduce", "write figure data files with fitted-vs-target summaries");
    reproduce->add_option("figure", figure, "fig1 | fig2")->required();
    reproduce->add_option("--out", reproduce_out, "output directory (default: current)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error("ConfigError", e.what());
    }

    try {
        if (simulate->parsed()) {
            const qwalk::SimulateResult result = qwalk::run_simulate(build_config(simulate, sim_opt));
            qwalk::write_output(result.config.out,
                                [&](std::ostream& out) { qwalk::emit_simulate(result, out); });
            if (!result.config.out.empty()) {
                std::cout << "wrote " << result.config.out << "\n";
            }
            if (result.direct && result.kspace) {
                std::cout << "max method discrepancy: " << qwalk::format_g17(result.max_discrepancy)
                          << "\n";
            }
        } else if (asymptote->parsed()) {
            const qwalk::AsymptoteResult result = qwalk::run_asymptote(build_config(asymptote, asym_opt));
            qwalk::write_output(result.config.out, [&](std::ostream& out) {
                out << qwalk::asymptote_json(result).dump(2) << "\n";
            });
        } else if (reproduce->parsed()) {
            const qwalk::ReproduceResult result = qwalk::run_reproduce(figure, reproduce_out);
            for (const std::string& f : result.files) std::cout << "wrote " << f << "\n";
        }
    } catch (const qwalk::Error& e) {
        return emit_error(e.kind(), e.what(), hint_for(e));
    } catch (const std::exception& e) {
        return emit_error("InternalError", e.what());
    }
    return 0;
}
