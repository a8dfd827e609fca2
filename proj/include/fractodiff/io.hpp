#pragma once

#include "solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace fractodiff::io {

using json = nlohmann::ordered_json;

// 17 significant digits; round-trips every double
inline std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) { os << json(s).dump(); }

inline void write(std::ostream& os, const json& v, int indent, int level) {
    auto pad = [&](int l) {
        if (indent > 0) os << '\n' << std::string(static_cast<std::size_t>(indent * l), ' ');
    };
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                os << "{}";
                return;
            }
            os << '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) os << ',';
                first = false;
                pad(level + 1);
                write_string(os, it.key());
                os << (indent > 0 ? ": " : ":");
                write(os, it.value(), indent, level + 1);
            }
            pad(level);
            os << '}';
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                os << "[]";
                return;
            }
            // arrays of numbers stay on one line
            bool flat = true;
            for (const auto& e : v) flat = flat && (e.is_number() || e.is_null());
            os << '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) os << (flat && indent > 0 ? ", " : ",");
                first = false;
                if (!flat) pad(level + 1);
                write(os, e, indent, level + 1);
            }
            if (!flat) pad(level);
            os << ']';
            return;
        }
        case json::value_t::number_float: {
            double x = v.get<double>();
            if (std::isfinite(x)) {
                std::string s = format_real(x);
                // keep it a float on re-read
                if (s.find_first_of(".eE") == std::string::npos) s += ".0";
                os << s;
            } else {
                os << "null";
            }
            return;
        }
        default:
            os << v.dump();
    }
}

}  // namespace detail

inline void write_json(std::ostream& os, const json& v, int indent = 2) {
    detail::write(os, v, indent, 0);
    os << '\n';
}

inline std::string dump_json(const json& v, int indent = 2) {
    std::ostringstream os;
    write_json(os, v, indent);
    return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return json::parse(f);
}

// RFC 4180 quoting, LF line endings
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((emit(cells, first)), ...);
        os_ << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        bool first = true;
        for (const auto& c : cells) emit(c, first);
        os_ << '\n';
    }

private:
    void sep(bool& first) {
        if (!first) os_ << ',';
        first = false;
    }
    void emit(const std::string& s, bool& first) {
        sep(first);
        if (s.find_first_of(",\"\n\r") == std::string::npos) {
            os_ << s;
            return;
        }
        os_ << '"';
        for (char c : s) {
            if (c == '"') os_ << '"';
            os_ << c;
        }
        os_ << '"';
    }
    void emit(const char* s, bool& first) { emit(std::string(s), first); }
    void emit(double x, bool& first) {
        sep(first);
        os_ << format_real(x);
    }
    template <class I>
        requires std::is_integral_v<I>
    void emit(I x, bool& first) {
        sep(first);
        os_ << x;
    }
    std::ostream& os_;
};

inline json domain_to_json(const SpectralDomain& d) {
    json sites = json::array();
    for (const auto& s : d.boundary_sites) sites.push_back({{"name", s.name}, {"coord", s.coord}});
    return {{"family", d.family},      {"gamma", d.gamma},
            {"s", d.s},                {"left", d.left},
            {"right", d.right},        {"coords", d.coords},
            {"quad_weights", d.weights}, {"eigenvalues", d.eigenvalues},
            {"eigenvectors", d.eigenvectors}, {"boundary_sites", sites}};
}

inline SpectralDomain domain_from_json(const json& j) {
    SpectralDomain d;
    try {
        d.family = j.at("family").get<std::string>();
        d.gamma = j.at("gamma").get<double>();
        d.s = j.at("s").get<double>();
        d.left = j.at("left").get<double>();
        d.right = j.at("right").get<double>();
        d.coords = j.at("coords").get<std::vector<double>>();
        d.weights = j.at("quad_weights").get<std::vector<double>>();
        d.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        d.eigenvectors = j.at("eigenvectors").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw domain_error(std::string("malformed domain JSON: ") + e.what());
    }
    if (d.weights.size() != d.coords.size() || d.eigenvectors.size() != d.coords.size() * d.eigenvalues.size())
        throw domain_error("domain JSON arrays have inconsistent sizes");
    d.finalize_geometry();
    return d;
}

// long format: t, node_index, x, value
inline void write_solution_csv(std::ostream& os, const Solution& u) {
    CsvWriter csv(os);
    csv.row("t", "node_index", "x", "value");
    const auto& d = *u.domain;
    for (int n = 0; n <= u.grid.n_steps; ++n)
        for (std::size_t i = 0; i < d.n_nodes(); ++i) csv.row(u.grid.t(n), i, d.coords[i], u.field[n][i]);
}

inline json solution_metadata(const Solution& u) {
    const auto& m = u.meta;
    json j = {{"kind", to_string(m.kind)},
              {"alpha", m.alpha},
              {"domain_family", u.domain->family},
              {"n_nodes", m.n_nodes},
              {"n_modes", m.n_modes},
              {"n_steps", m.n_steps},
              {"dt", m.dt},
              {"quadrature", m.quadrature}};
    if (m.concentration) {
        const auto& c = *m.concentration;
        j["concentration"] = {{"schedule", c.schedule},
                              {"cauchy", c.cauchy},
                              {"j_used", c.j_used},
                              {"converged", c.converged}};
    } else {
        j["concentration"] = nullptr;
    }
    j["initial_amplitudes"] = u.initial_amplitudes;
    json coeffs = json::array();
    for (std::size_t k = 0; k < u.domain->n_modes(); ++k) {
        std::vector<double> v(u.grid.size());
        for (int n = 0; n <= u.grid.n_steps; ++n) v[n] = u.coefficient(k, n);
        coeffs.push_back(v);
    }
    j["spectral_coeffs"] = coeffs;
    return j;
}

}  // namespace fractodiff::io
