#pragma once

#include <fractodiff/io.hpp>
#include <fractodiff/solver.hpp>

#include <memory>
#include <stdexcept>
#include <string>

namespace fractodiff::cli {

using json = io::json;

// bad or inconsistent configuration; exit code 2
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return text;
    }
}

// key may be dotted: params.alpha=0.3
inline void apply_override(json& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw config_error("--set expects key=value, got '" + assignment + "'");
    std::string key = assignment.substr(0, eq);
    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
        auto dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw config_error("empty key segment in '" + key + "'");
        if (!node->is_object()) *node = json::object();
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = parse_value(assignment.substr(eq + 1));
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(std::string("config key '") + key + "' has the wrong type");
    }
}

template <class T>
T require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw config_error(std::string("missing config key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(std::string("config key '") + key + "' has the wrong type");
    }
}

inline std::shared_ptr<const SpectralDomain> make_domain(const json& j) {
    std::string family = get_or<std::string>(j, "family", "interval_sfl");
    try {
        if (family == "interval_sfl") {
            auto n = get_or<int>(j, "n_modes", 64);
            if (n < 1) throw config_error("n_modes must be positive");
            return std::make_shared<const SpectralDomain>(
                build_interval_sfl(n, get_or<double>(j, "s", 1.0), get_or<double>(j, "length", 1.0),
                                   get_or<std::size_t>(j, "n_nodes", 0)));
        }
        if (family == "interval_rfl") {
            auto n = get_or<int>(j, "n_cells", 200);
            if (n < 8) throw config_error("n_cells must be at least 8");
            return std::make_shared<const SpectralDomain>(build_interval_rfl(n, get_or<double>(j, "s", 0.5)));
        }
        if (family == "file")
            return std::make_shared<const SpectralDomain>(io::domain_from_json(io::read_json_file(require<std::string>(j, "path"))));
    } catch (const domain_error& e) {
        throw config_error(std::string("domain: ") + e.what());
    } catch (const resolution_error& e) {
        throw config_error(std::string("domain: ") + e.what());
    }
    throw config_error("unknown domain family '" + family + "'");
}

// number, {"preset": zero|constant|mode, ...} or {"values": [...]}
inline GridFunction make_grid_function(const SpectralDomain& d, const json& j) {
    std::size_t n = d.n_nodes();
    if (j.is_null()) return GridFunction(n);
    if (j.is_number()) return GridFunction(n, j.get<double>());
    if (!j.is_object()) throw config_error("grid function must be a number or an object");
    if (j.contains("values")) {
        auto v = require<std::vector<double>>(j, "values");
        if (v.size() != n)
            throw config_error("grid function has " + std::to_string(v.size()) + " values, domain has " +
                               std::to_string(n) + " nodes");
        return GridFunction(std::move(v));
    }
    std::string preset = get_or<std::string>(j, "preset", "zero");
    double scale = get_or<double>(j, "scale", 1.0);
    if (preset == "zero") return GridFunction(n);
    if (preset == "constant") return GridFunction(n, get_or<double>(j, "value", 1.0) * scale);
    if (preset == "mode") {
        int k = get_or<int>(j, "k", 1);
        if (k < 1 || static_cast<std::size_t>(k) > d.n_modes()) throw config_error("mode index out of range");
        return scale * d.mode_function(k - 1);
    }
    throw config_error("unknown grid-function preset '" + preset + "'");
}

inline DerivativeKind make_kind(const std::string& s) {
    if (s == "caputo") return DerivativeKind::caputo;
    if (s == "riemann-liouville" || s == "riemann_liouville" || s == "rl") return DerivativeKind::riemann_liouville;
    throw config_error("kind must be caputo or riemann-liouville");
}

inline FractionalOrder make_alpha(double a) {
    if (!(a > 0.0 && a < 1.0)) throw config_error("alpha must lie in (0,1)");
    return FractionalOrder(a);
}

struct SolveSetup {
    ProblemSpec problem;
    TimeGrid grid;
    SolveOptions options;
};

// f: {"space": <grid function>, "t0": a, "t1": b}; a window makes f piecewise constant in time
// h: {"left": number | [per node], "right": ...}
inline SolveSetup make_problem(const json& cfg) {
    auto domain = make_domain(cfg.contains("domain") ? cfg.at("domain") : json::object());
    double T = get_or<double>(cfg, "T", 1.0);
    int n_steps = get_or<int>(cfg, "n_steps", 50);
    if (!(T > 0.0)) throw config_error("T must be positive");
    if (n_steps < 1) throw config_error("n_steps must be positive");
    TimeGrid grid = TimeGrid::over(T, n_steps);

    ProblemSpec p;
    p.kind = make_kind(get_or<std::string>(cfg, "kind", "caputo"));
    p.alpha = make_alpha(get_or<double>(cfg, "alpha", 0.5));
    p.domain = domain;
    p.horizon = grid.horizon();
    p.u0 = make_grid_function(*domain, cfg.contains("u0") ? cfg.at("u0") : json());

    if (cfg.contains("f") && !cfg.at("f").is_null()) {
        const json& f = cfg.at("f");
        json space = f.is_object() && f.contains("space") ? f.at("space") : f;
        GridFunction g = make_grid_function(*domain, space);
        FieldSeries fs(grid, GridFunction(domain->n_nodes()));
        if (f.is_object() && (f.contains("t0") || f.contains("t1"))) {
            double t0 = get_or<double>(f, "t0", 0.0), t1 = get_or<double>(f, "t1", T);
            if (!(t0 >= 0.0 && t1 > t0 && t1 <= T)) throw config_error("forcing window needs 0 <= t0 < t1 <= T");
            fs.interp = Interpolation::piecewise_constant;
            for (int n = 0; n < n_steps; ++n) {
                // cell [t_n, t_{n+1}) carries the window's value at its midpoint
                double mid = grid.t(n) + 0.5 * grid.dt;
                if (mid > t0 && mid < t1) fs[n] = g;
            }
        } else {
            for (int n = 0; n <= n_steps; ++n) fs[n] = g;
        }
        p.f = std::move(fs);
    }
    if (cfg.contains("h") && !cfg.at("h").is_null()) {
        const json& h = cfg.at("h");
        for (const auto& site : domain->boundary_sites) {
            std::vector<double> v(grid.size(), 0.0);
            if (h.contains(site.name)) {
                const json& hv = h.at(site.name);
                if (hv.is_number()) {
                    std::fill(v.begin(), v.end(), hv.get<double>());
                } else if (hv.is_array()) {
                    v = hv.get<std::vector<double>>();
                    if (v.size() != grid.size()) throw config_error("boundary series length does not match the grid");
                } else {
                    throw config_error("boundary data must be a number or an array");
                }
            }
            p.h.emplace_back(grid, std::move(v));
        }
    }
    SolveOptions opt;
    opt.cauchy_tol = get_or<double>(cfg, "cauchy_tol", 1e-3);
    opt.schedule = get_or<std::vector<int>>(cfg, "schedule", {});
    opt.require_convergence = get_or<bool>(cfg, "require_convergence", true);
    try {
        p.validate(grid);
    } catch (const domain_error& e) {
        throw config_error(e.what());
    }
    return {std::move(p), grid, std::move(opt)};
}

}  // namespace fractodiff::cli
