#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hus/commands.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hus::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void attach_common_flags(CLI::App* cmd, std::string& config_path, std::string& h_expr,
                         std::string& cycle_list, std::string& family, double& epsilon,
                         long long& window, std::string& profile, std::string& residuals,
                         std::uint64_t& seed, std::string& out) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its fields");
    cmd->add_option("--h", h_expr, "step size (number or expression such as 0.1 or pi)");
    cmd->add_option("--cycle", cycle_list,
                    "comma-separated cycle values; entries may use pi and sweep symbols, "
                    "e.g. \"0,A,-A\" or \"pi,2*pi\"");
    cmd->add_option("--family", family,
                    "first_homog | first_nonhomog | hill | hill_nonhomog | pqr | pqr2 | pqr3 | pqr4");
    cmd->add_option("--epsilon", epsilon, "residual bound for perturbations");
    cmd->add_option("--window", window, "window length in steps (0 = 64 * period)");
    cmd->add_option("--profile", profile,
                    "constant_plus | constant_minus | alternating | random_uniform | explicit");
    cmd->add_option("--residuals", residuals, "comma-separated residuals for --profile explicit");
    cmd->add_option("--seed", seed, "seed for random residual profiles");
    cmd->add_option("--out", out, "json | csv");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyers-Ulam stability analysis of periodic-coefficient h-difference equations"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help"); // frees -h for the step-size flag

    std::string config_path;
    std::string h_expr, cycle_list, family, profile, residuals, out;
    double epsilon = -1.0;
    long long window = -1;
    std::uint64_t seed = 0;
    long long horizon = -1;
    std::uint64_t budget = 0;
    bool dump_trajectories = false;
    std::string sweep_param;
    double sweep_min = 0.0, sweep_max = 0.0;
    long long sweep_count = 0;

    CLI::App* analyze = app.add_subcommand("analyze", "stability constants and verdict");
    CLI::App* track = app.add_subcommand("track", "perturb, then build the tracking solution");
    CLI::App* sweep = app.add_subcommand("sweep", "evaluate a parameter grid, one row per point");
    CLI::App* oracle = app.add_subcommand("oracle", "extremal residual sign-pattern search");
    for (CLI::App* cmd : {analyze, track, sweep, oracle}) {
        cmd->set_help_flag("--help", "print help");
        attach_common_flags(cmd, config_path, h_expr, cycle_list, family, epsilon, window, profile,
                            residuals, seed, out);
    }
    track->add_flag("--dump-trajectories", dump_trajectories,
                    "include psi/exact/deviation arrays in the JSON report");
    sweep->add_option("--param", sweep_param, "swept symbol (h or a cycle symbol such as A)");
    sweep->add_option("--min", sweep_min, "grid minimum");
    sweep->add_option("--max", sweep_max, "grid maximum");
    sweep->add_option("--count", sweep_count, "grid point count");
    oracle->add_option("--horizon", horizon, "residual pattern length (0 = 4 * period)");
    oracle->add_option("--budget", budget, "pattern evaluations; exhaustive when 2^horizon fits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    hus::AnalysisConfig cfg;
    try {
        if (!config_path.empty()) cfg = hus::config_from_json_text(read_file(config_path));
        if (!h_expr.empty()) cfg.h = h_expr;
        if (!cycle_list.empty()) cfg.cycle = hus::split_list(cycle_list);
        if (!family.empty()) cfg.family = family;
        if (epsilon >= 0.0) cfg.epsilon = epsilon;
        if (window >= 0) cfg.window = window;
        if (!profile.empty()) cfg.profile = profile;
        if (!residuals.empty()) {
            cfg.residuals.clear();
            for (const auto& tok : hus::split_list(residuals)) {
                cfg.residuals.push_back(hus::eval_expr(tok, {}));
            }
        }
        if (seed != 0) cfg.seed = seed;
        if (!out.empty()) cfg.out = out;
        if (horizon >= 0) cfg.horizon = horizon;
        if (budget != 0) cfg.budget = budget;
        if (dump_trajectories) cfg.dump_trajectories = true;
        if (!sweep_param.empty()) cfg.sweep = hus::SweepSpec{sweep_param, sweep_min, sweep_max, sweep_count};
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const hus::CommandResult result = hus::execute_command(command, cfg);
    std::cout << result.output;
    return result.exit_code;
}
