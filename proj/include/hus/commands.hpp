#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hus/config.hpp"
#include "hus/report.hpp"
#include "hus/tracking.hpp"

namespace hus {

struct CommandResult {
    std::string output;
    int exit_code = 0;
};

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::NotStableUnitModulus: return "not_stable_unit_modulus";
        case Verdict::DegenerateZeroFactor: return "degenerate_zero_factor";
    }
    return "?";
}

inline std::string side_state_name(SideState s) {
    switch (s) {
        case SideState::Ok: return "ok";
        case SideState::UnitModulus: return "unit_modulus";
        case SideState::ZeroFactor: return "zero_factor";
    }
    return "?";
}

inline int exit_code_for_verdict(Verdict v) {
    switch (v) {
        case Verdict::Stable: return 0;
        case Verdict::NotStableUnitModulus: return 3;
        case Verdict::DegenerateZeroFactor: return 4;
    }
    return 1;
}

namespace detail {

inline Json side_to_json(const SideReport& side) {
    Json j = Json::object();
    j.set("e", Json::number(side.e));
    j.set("state", Json::string(side_state_name(side.state)));
    if (side.sums) {
        Json sums = Json::array();
        for (double v : side.sums->values) sums.push(Json::number(v));
        j.set("sums", std::move(sums));
        j.set("argmax", Json::integer(static_cast<long long>(side.sums->argmax_index)));
    }
    if (side.k0) {
        j.set("k0", Json::number(*side.k0));
        j.set("k0_minimal", Json::boolean(side.minimal));
    }
    return j;
}

inline Json derived_coefficients_json(const PeriodicCycle& cycle, EquationFamily family) {
    Json j = Json::object();
    const auto cycle_json = [](const PeriodicCycle& c) {
        Json arr = Json::array();
        for (double v : c.values()) arr.push(Json::number(v));
        return arr;
    };
    if (equation_order(family) == 2) {
        const PeriodicCycle coeff = hill_coefficient_cycle(cycle);
        j.set("coefficient", cycle_json(coeff));
        j.set("minimal_period", Json::integer(coeff.minimal_period()));
    } else {
        const ThirdOrderCoefficients c = third_order_coefficients(cycle, family);
        j.set("p", cycle_json(c.p));
        j.set("q", cycle_json(c.q));
        j.set("r", cycle_json(c.r));
        j.set("minimal_period_p", Json::integer(c.p.minimal_period()));
        j.set("minimal_period_q", Json::integer(c.q.minimal_period()));
        j.set("minimal_period_r", Json::integer(c.r.minimal_period()));
    }
    return j;
}

inline Json analysis_json(const PeriodicCycle& cycle, const StabilityReport& report) {
    Json j = Json::object();
    j.set("h", Json::number(cycle.h()));
    Json cyc = Json::array();
    for (double v : cycle.values()) cyc.push(Json::number(v));
    j.set("cycle", std::move(cyc));
    j.set("period", Json::integer(cycle.period()));
    j.set("omega", Json::number(cycle.omega()));
    j.set("family", Json::string(family_name(report.family)));
    j.set("verdict", Json::string(verdict_name(report.verdict)));
    j.set("positive", side_to_json(report.positive));
    j.set("negative", side_to_json(report.negative));
    if (report.composite) j.set("composite", Json::number(*report.composite));
    if (equation_order(report.family) >= 2) {
        j.set("derived_coefficients", derived_coefficients_json(cycle, report.family));
    }
    return j;
}

inline TimeIndex resolved_window(const AnalysisConfig& cfg, const PeriodicCycle& cycle) {
    if (cfg.window < 0) throw ConfigError("window must be >= 0");
    return cfg.window > 0 ? cfg.window : 64 * cycle.period();
}

} // namespace detail

inline CommandResult run_analyze(const AnalysisConfig& cfg) {
    const PeriodicCycle cycle = resolve_cycle(cfg);
    const EquationFamily family = parse_family(cfg.family);
    const StabilityReport report = analyze_stability(cycle, family);

    Json doc = Json::object();
    doc.set("command", Json::string("analyze"));
    doc.set("config", config_to_json(cfg));
    doc.set("report", detail::analysis_json(cycle, report));

    CommandResult out{doc.dump(), exit_code_for_verdict(report.verdict)};
    if (cfg.out == "csv") {
        std::string csv = "key,value\n";
        csv += "verdict," + verdict_name(report.verdict) + "\n";
        csv += "e_pos," + format_double(report.positive.e) + "\n";
        csv += "e_neg," + format_double(report.negative.e) + "\n";
        if (report.positive.k0) csv += "k0_pos," + format_double(*report.positive.k0) + "\n";
        if (report.negative.k0) csv += "k0_neg," + format_double(*report.negative.k0) + "\n";
        if (report.composite) csv += "composite," + format_double(*report.composite) + "\n";
        out.output = csv;
    }
    return out;
}

inline CommandResult run_track(const AnalysisConfig& cfg) {
    const PeriodicCycle cycle = resolve_cycle(cfg);
    const EquationFamily family = parse_family(cfg.family);
    const EquationSpec spec = EquationSpec::make(family, cycle);
    const TimeIndex window = detail::resolved_window(cfg, cycle);
    const int ord = spec.order();
    if (window < ord + 1) throw ConfigError("window too short for the equation order");

    const ResidualProfile profile = resolve_profile(cfg);
    const std::vector<double> ics = {1.0, 0.7, 0.4};
    const Trajectory psi =
        perturb(spec, profile, std::span<const double>(ics.data(), static_cast<std::size_t>(ord)),
                window);
    const TrackingResult tracked = track(spec, psi);
    const StabilityReport report = analyze_stability(cycle, family);

    if (cfg.out == "csv") {
        std::string csv = "index,t,psi,exact,deviation\n";
        for (TimeIndex k = psi.start(); k <= psi.end(); ++k) {
            csv += std::to_string(k) + "," + format_double(static_cast<double>(k) * psi.h()) + "," +
                   format_double(psi[k]) + "," + format_double(tracked.exact[k]) + "," +
                   format_double(psi[k] - tracked.exact[k]) + "\n";
        }
        return {csv, 0};
    }

    Json rep = Json::object();
    rep.set("verdict", Json::string(verdict_name(report.verdict)));
    rep.set("window", Json::integer(window));
    rep.set("epsilon_configured", Json::number(cfg.epsilon));
    rep.set("epsilon_measured", Json::number(tracked.epsilon));
    rep.set("constant", Json::number(tracked.constant));
    rep.set("certified_bound", Json::number(tracked.certified_bound));
    rep.set("sup_deviation", Json::number(tracked.sup_deviation));
    rep.set("ratio", Json::number(tracked.ratio));
    rep.set("exact_residual_sup", Json::number(tracked.exact_residual_sup));
    if (report.positive.sums && report.negative.sums) {
        Json sel = Json::object();
        sel.set("positive", Json::integer(static_cast<long long>(report.positive.sums->argmax_index)));
        sel.set("negative", Json::integer(static_cast<long long>(report.negative.sums->argmax_index)));
        rep.set("selected_sums", std::move(sel));
    }
    if (report.positive.k0) rep.set("k0_pos", Json::number(*report.positive.k0));
    if (report.negative.k0) rep.set("k0_neg", Json::number(*report.negative.k0));
    if (report.composite) rep.set("composite", Json::number(*report.composite));
    if (cfg.dump_trajectories) {
        Json tr = Json::object();
        Json idx = Json::array(), tv = Json::array(), pv = Json::array(), xv = Json::array(),
             dv = Json::array();
        for (TimeIndex k = psi.start(); k <= psi.end(); ++k) {
            idx.push(Json::integer(k));
            tv.push(Json::number(static_cast<double>(k) * psi.h()));
            pv.push(Json::number(psi[k]));
            xv.push(Json::number(tracked.exact[k]));
            dv.push(Json::number(psi[k] - tracked.exact[k]));
        }
        tr.set("index", std::move(idx));
        tr.set("t", std::move(tv));
        tr.set("psi", std::move(pv));
        tr.set("exact", std::move(xv));
        tr.set("deviation", std::move(dv));
        rep.set("trajectories", std::move(tr));
    }

    Json doc = Json::object();
    doc.set("command", Json::string("track"));
    doc.set("config", config_to_json(cfg));
    doc.set("report", std::move(rep));
    return {doc.dump(), 0};
}

namespace detail {

struct SweepRow {
    long long index = 0;
    double value = 0.0;
    bool skipped = false;
    std::string reason;
    std::optional<StabilityReport> report;
    std::optional<double> h;
};

inline int sweep_thread_cap() {
    if (const char* env = std::getenv("HUS_HILL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != nullptr && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Boundary band for flagging sweep rows: verdict bands plus argmax ties.
inline constexpr double kSweepBoundaryBand = 1e-9;

inline void classify_row(SweepRow& row, const PeriodicCycle& cycle, EquationFamily family) {
    row.h = cycle.h();
    row.report = analyze_stability(cycle, family);
    if (row.report->verdict != Verdict::Stable) {
        row.skipped = true;
        row.reason = verdict_name(row.report->verdict);
        return;
    }
    for (TimeIndex k = 0; k < cycle.period(); ++k) {
        if (std::abs(cycle.factor_at(k)) <= kSweepBoundaryBand ||
            std::abs(cycle.negated().factor_at(k)) <= kSweepBoundaryBand) {
            row.skipped = true;
            row.reason = "near_zero_factor";
            return;
        }
    }
    const auto near_unit = [](double e) {
        return std::abs(std::abs(e) - 1.0) <= kSweepBoundaryBand;
    };
    if (near_unit(row.report->positive.e) || near_unit(row.report->negative.e)) {
        row.skipped = true;
        row.reason = "near_unit_modulus";
        return;
    }
    const auto tie = [](const ReciprocalSums& sums) {
        if (sums.values.size() < 2) return false;
        double top = sums.max(), second = -1.0;
        for (std::size_t i = 0; i < sums.values.size(); ++i) {
            if (i == sums.argmax_index) continue;
            second = std::max(second, sums.values[i]);
        }
        return (top - second) <= kSweepBoundaryBand * top;
    };
    if ((row.report->positive.sums && tie(*row.report->positive.sums)) ||
        (row.report->negative.sums && tie(*row.report->negative.sums))) {
        row.skipped = true;
        row.reason = "argmax_tie";
    }
}

} // namespace detail

inline CommandResult run_sweep(const AnalysisConfig& cfg) {
    if (!cfg.sweep) throw ConfigError("sweep needs a grid spec (--param/--min/--max/--count)");
    const SweepSpec& grid = *cfg.sweep;
    if (grid.count < 1) throw ConfigError("sweep count must be >= 1");
    if (grid.parameter.empty()) throw ConfigError("sweep parameter name is empty");
    const EquationFamily family = parse_family(cfg.family);

    AnalysisConfig effective = cfg;
    if (grid.parameter == "h") effective.h = "h";

    std::vector<detail::SweepRow> rows(static_cast<std::size_t>(grid.count));
    const auto value_at = [&](long long i) {
        if (grid.count == 1) return grid.min;
        return grid.min + (grid.max - grid.min) * static_cast<double>(i) /
                              static_cast<double>(grid.count - 1);
    };

    const auto work = [&](long long i) {
        detail::SweepRow& row = rows[static_cast<std::size_t>(i)];
        row.index = i;
        row.value = value_at(i);
        try {
            const PeriodicCycle cycle = resolve_cycle(effective, {{grid.parameter, row.value}});
            detail::classify_row(row, cycle, family);
        } catch (const Error& e) {
            row.skipped = true;
            row.reason = e.what();
        } catch (const std::invalid_argument& e) {
            row.skipped = true;
            row.reason = e.what();
        }
    };

    const int threads = std::min<long long>(detail::sweep_thread_cap(), grid.count);
    if (threads <= 1) {
        for (long long i = 0; i < grid.count; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t]() {
                for (long long i = t; i < grid.count; i += threads) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    if (cfg.out == "csv") {
        std::string csv =
            "index,value,h,e_pos,e_neg,argmax_pos,argmax_neg,k0_pos,k0_neg,composite,verdict,"
            "skipped,reason\n";
        for (const auto& row : rows) {
            csv += std::to_string(row.index) + "," + format_double(row.value) + ",";
            csv += row.h ? format_double(*row.h) : "";
            const auto opt_num = [&](const std::optional<double>& v) {
                return v ? format_double(*v) : std::string();
            };
            if (row.report) {
                const auto& r = *row.report;
                csv += "," + format_double(r.positive.e) + "," + format_double(r.negative.e);
                csv += "," + (r.positive.sums ? std::to_string(r.positive.sums->argmax_index)
                                              : std::string());
                csv += "," + (r.negative.sums ? std::to_string(r.negative.sums->argmax_index)
                                              : std::string());
                csv += "," + opt_num(r.positive.k0) + "," + opt_num(r.negative.k0);
                csv += "," + opt_num(r.composite) + "," + verdict_name(r.verdict);
            } else {
                csv += ",,,,,,,,";
            }
            csv += std::string(",") + (row.skipped ? "true" : "false") + "," +
                   csv_cell(row.reason) + "\n";
        }
        return {csv, 0};
    }

    Json arr = Json::array();
    for (const auto& row : rows) {
        Json r = Json::object();
        r.set("index", Json::integer(row.index));
        r.set(grid.parameter, Json::number(row.value));
        if (row.h) r.set("h", Json::number(*row.h));
        r.set("skipped", Json::boolean(row.skipped));
        if (!row.reason.empty()) r.set("reason", Json::string(row.reason));
        if (row.report) {
            const auto& rep = *row.report;
            r.set("e_pos", Json::number(rep.positive.e));
            r.set("e_neg", Json::number(rep.negative.e));
            if (rep.positive.sums) {
                r.set("argmax_pos",
                      Json::integer(static_cast<long long>(rep.positive.sums->argmax_index)));
            }
            if (rep.negative.sums) {
                r.set("argmax_neg",
                      Json::integer(static_cast<long long>(rep.negative.sums->argmax_index)));
            }
            if (rep.positive.k0) r.set("k0_pos", Json::number(*rep.positive.k0));
            if (rep.negative.k0) r.set("k0_neg", Json::number(*rep.negative.k0));
            if (rep.composite) r.set("composite", Json::number(*rep.composite));
            r.set("verdict", Json::string(verdict_name(rep.verdict)));
        }
        arr.push(std::move(r));
    }
    Json doc = Json::object();
    doc.set("command", Json::string("sweep"));
    doc.set("config", config_to_json(cfg));
    doc.set("rows", std::move(arr));
    return {doc.dump(), 0};
}

inline CommandResult run_oracle(const AnalysisConfig& cfg) {
    const PeriodicCycle cycle = resolve_cycle(cfg);
    const EquationFamily family = parse_family(cfg.family);
    if (cfg.horizon < 0) throw ConfigError("horizon must be >= 0");
    const TimeIndex horizon = cfg.horizon > 0 ? cfg.horizon : 4 * cycle.period();
    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : 1e-3;
    const OracleEstimate est =
        extremal_ratio_oracle(cycle, family, horizon, cfg.budget, eps, cfg.seed);

    if (cfg.out == "csv") {
        std::string csv = "key,value\n";
        csv += "best_ratio," + format_double(est.best_ratio) + "\n";
        csv += "best_pattern," + est.best_pattern + "\n";
        csv += "horizon," + std::to_string(est.horizon) + "\n";
        csv += std::string("exhaustive,") + (est.exhaustive ? "true" : "false") + "\n";
        csv += "constant," + format_double(est.constant) + "\n";
        csv += "epsilon," + format_double(est.epsilon) + "\n";
        return {csv, 0};
    }

    Json rep = Json::object();
    rep.set("horizon", Json::integer(est.horizon));
    rep.set("budget", Json::unsigned_integer(cfg.budget));
    rep.set("exhaustive", Json::boolean(est.exhaustive));
    rep.set("epsilon", Json::number(est.epsilon));
    rep.set("constant", Json::number(est.constant));
    rep.set("best_ratio", Json::number(est.best_ratio));
    rep.set("best_pattern", Json::string(est.best_pattern));
    Json doc = Json::object();
    doc.set("command", Json::string("oracle"));
    doc.set("config", config_to_json(cfg));
    doc.set("report", std::move(rep));
    return {doc.dump(), 0};
}

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const NotStableError*>(&e)) return 3;
    if (dynamic_cast<const DegenerateError*>(&e)) return 4;
    if (dynamic_cast<const InconclusiveError*>(&e)) return 5;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
    return 1;
}

/// Dispatch with errors folded into a JSON diagnostic and the documented
/// exit codes: 0 ok, 2 config, 3 not stable, 4 degenerate, 5 inconclusive.
inline CommandResult execute_command(const std::string& command, const AnalysisConfig& cfg) {
    try {
        if (command == "analyze") return run_analyze(cfg);
        if (command == "track") return run_track(cfg);
        if (command == "sweep") return run_sweep(cfg);
        if (command == "oracle") return run_oracle(cfg);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const std::exception& e) {
        Json doc = Json::object();
        doc.set("command", Json::string(command));
        Json err = Json::object();
        err.set("message", Json::string(e.what()));
        doc.set("error", std::move(err));
        return {doc.dump(), exit_code_for(e)};
    }
}

} // namespace hus
