#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hus/dynamics.hpp"
#include "hus/errors.hpp"
#include "hus/report.hpp"

namespace hus {

/// Grid of values for one named parameter, evaluated left to right.
struct SweepSpec {
    std::string parameter;
    double min = 0.0;
    double max = 0.0;
    long long count = 0;
};

/// Everything the CLI commands need. h and cycle entries are kept as
/// expression strings ("pi", "2*pi", "A", "-A", plain numbers) so that sweep
/// grids can re-evaluate them per point; config echoes reparse to the exact
/// same analysis.
struct AnalysisConfig {
    std::string h = "1";
    std::vector<std::string> cycle;
    std::string family = "hill";
    double epsilon = 0.0;
    long long window = 0; // 0 picks 64 * period
    std::string profile = "random_uniform";
    std::vector<double> residuals; // explicit profile only
    std::uint64_t seed = 0;
    std::string out = "json";
    long long horizon = 0; // oracle; 0 picks 4 * period
    std::uint64_t budget = 16384;
    bool dump_trajectories = false;
    std::optional<SweepSpec> sweep;
};

/// Evaluates a signed product expression: [+|-] factor (* factor)*, where a
/// factor is a number literal, "pi", or a bound parameter name.
inline double eval_expr(const std::string& text, const std::map<std::string, double>& bindings) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    }
    if (s.empty()) throw ConfigError("empty expression");
    double sign = 1.0;
    std::size_t pos = 0;
    if (s[pos] == '+' || s[pos] == '-') {
        if (s[pos] == '-') sign = -1.0;
        ++pos;
    }
    double value = sign;
    while (pos < s.size()) {
        std::size_t next = s.find('*', pos);
        const std::string factor = s.substr(pos, next == std::string::npos ? next : next - pos);
        if (factor.empty()) throw ConfigError("malformed expression '" + text + "'");
        if (factor == "pi") {
            value *= M_PI;
        } else if (auto it = bindings.find(factor); it != bindings.end()) {
            value *= it->second;
        } else {
            char* end = nullptr;
            const double parsed = std::strtod(factor.c_str(), &end);
            if (end == nullptr || *end != '\0') {
                throw ConfigError("unknown symbol '" + factor + "' in expression '" + text + "'");
            }
            value *= parsed;
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (!std::isfinite(value)) throw ConfigError("expression '" + text + "' is not finite");
    return value;
}

inline EquationFamily parse_family(const std::string& name) {
    std::string s;
    for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "first_homog" || s == "first_homogeneous") return EquationFamily::FirstHomogeneous;
    if (s == "first_nonhomog" || s == "first_nonhomogeneous")
        return EquationFamily::FirstNonhomogeneous;
    if (s == "hill") return EquationFamily::Hill;
    if (s == "hill_nonhomog" || s == "hill_nonhomogeneous") return EquationFamily::HillNonhomogeneous;
    if (s == "pqr") return EquationFamily::Pqr;
    if (s == "pqr2") return EquationFamily::Pqr2;
    if (s == "pqr3") return EquationFamily::Pqr3;
    if (s == "pqr4") return EquationFamily::Pqr4;
    throw ConfigError("unknown family '" + name + "'");
}

inline std::string family_name(EquationFamily family) {
    switch (family) {
        case EquationFamily::FirstHomogeneous: return "first_homog";
        case EquationFamily::FirstNonhomogeneous: return "first_nonhomog";
        case EquationFamily::Hill: return "hill";
        case EquationFamily::HillNonhomogeneous: return "hill_nonhomog";
        case EquationFamily::Pqr: return "pqr";
        case EquationFamily::Pqr2: return "pqr2";
        case EquationFamily::Pqr3: return "pqr3";
        case EquationFamily::Pqr4: return "pqr4";
    }
    return "?";
}

/// Splits a comma-separated flag value into expression tokens.
inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(text);
    while (std::getline(ss, cur, ',')) {
        std::size_t b = cur.find_first_not_of(" \t");
        std::size_t e = cur.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty list entry in '" + text + "'");
        out.push_back(cur.substr(b, e - b + 1));
    }
    if (out.empty()) throw ConfigError("empty list '" + text + "'");
    return out;
}

namespace detail {

inline std::string expr_from_json(const nlohmann::json& j, const std::string& field) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return format_double(j.get<double>());
    throw ConfigError("field '" + field + "' must be a number or expression string");
}

} // namespace detail

inline AnalysisConfig config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    AnalysisConfig cfg;
    try {
        if (j.contains("h")) cfg.h = detail::expr_from_json(j["h"], "h");
        if (j.contains("cycle")) {
            if (!j["cycle"].is_array()) throw ConfigError("field 'cycle' must be an array");
            for (const auto& v : j["cycle"]) cfg.cycle.push_back(detail::expr_from_json(v, "cycle"));
        }
        if (j.contains("family")) cfg.family = j["family"].get<std::string>();
        if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
        if (j.contains("window")) cfg.window = j["window"].get<long long>();
        if (j.contains("profile")) cfg.profile = j["profile"].get<std::string>();
        if (j.contains("residuals")) cfg.residuals = j["residuals"].get<std::vector<double>>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("out")) cfg.out = j["out"].get<std::string>();
        if (j.contains("horizon")) cfg.horizon = j["horizon"].get<long long>();
        if (j.contains("budget")) cfg.budget = j["budget"].get<std::uint64_t>();
        if (j.contains("dump_trajectories")) cfg.dump_trajectories = j["dump_trajectories"].get<bool>();
        if (j.contains("sweep") && !j["sweep"].is_null()) {
            const auto& s = j["sweep"];
            SweepSpec spec;
            spec.parameter = s.at("parameter").get<std::string>();
            spec.min = s.at("min").get<double>();
            spec.max = s.at("max").get<double>();
            spec.count = s.at("count").get<long long>();
            cfg.sweep = spec;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return cfg;
}

/// Canonical config echo; reparsing this yields an identical analysis.
inline Json config_to_json(const AnalysisConfig& cfg) {
    Json j = Json::object();
    j.set("h", Json::string(cfg.h));
    Json cyc = Json::array();
    for (const auto& c : cfg.cycle) cyc.push(Json::string(c));
    j.set("cycle", std::move(cyc));
    j.set("family", Json::string(cfg.family));
    j.set("epsilon", Json::number(cfg.epsilon));
    j.set("window", Json::integer(cfg.window));
    j.set("profile", Json::string(cfg.profile));
    if (!cfg.residuals.empty()) {
        Json r = Json::array();
        for (double v : cfg.residuals) r.push(Json::number(v));
        j.set("residuals", std::move(r));
    }
    j.set("seed", Json::unsigned_integer(cfg.seed));
    j.set("out", Json::string(cfg.out));
    j.set("horizon", Json::integer(cfg.horizon));
    j.set("budget", Json::unsigned_integer(cfg.budget));
    j.set("dump_trajectories", Json::boolean(cfg.dump_trajectories));
    if (cfg.sweep) {
        Json s = Json::object();
        s.set("parameter", Json::string(cfg.sweep->parameter));
        s.set("min", Json::number(cfg.sweep->min));
        s.set("max", Json::number(cfg.sweep->max));
        s.set("count", Json::integer(cfg.sweep->count));
        j.set("sweep", std::move(s));
    }
    return j;
}

/// Evaluates h and the cycle under the given parameter bindings.
inline PeriodicCycle resolve_cycle(const AnalysisConfig& cfg,
                                   const std::map<std::string, double>& bindings = {}) {
    if (cfg.cycle.empty()) throw ConfigError("cycle must have at least one value");
    const double h = eval_expr(cfg.h, bindings);
    if (!(h > 0.0)) throw ConfigError("h must be > 0");
    std::vector<double> values;
    values.reserve(cfg.cycle.size());
    for (const auto& e : cfg.cycle) values.push_back(eval_expr(e, bindings));
    try {
        return PeriodicCycle(h, std::move(values));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid cycle: ") + e.what());
    }
}

inline ResidualProfile resolve_profile(const AnalysisConfig& cfg) {
    if (cfg.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    if (cfg.profile == "constant_plus") return ResidualProfile::constant_plus(cfg.epsilon);
    if (cfg.profile == "constant_minus") return ResidualProfile::constant_minus(cfg.epsilon);
    if (cfg.profile == "alternating") return ResidualProfile::alternating(cfg.epsilon);
    if (cfg.profile == "random_uniform" || cfg.profile == "random") {
        return ResidualProfile::random_uniform(cfg.epsilon, cfg.seed);
    }
    if (cfg.profile == "explicit") {
        try {
            return ResidualProfile::explicit_values(cfg.epsilon, cfg.residuals);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("unknown profile '" + cfg.profile + "'");
}

} // namespace hus
