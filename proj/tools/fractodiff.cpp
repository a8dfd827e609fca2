// fractodiff command-line driver
#include "experiments.hpp"

#include <fractodiff/verify.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace fractodiff;
using namespace fractodiff::cli;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json cfg = json::object();
    if (!path.empty()) {
        try {
            cfg = io::read_json_file(path);
        } catch (const json::parse_error& e) {
            throw config_error("config is not valid JSON: " + std::string(e.what()));
        } catch (const std::runtime_error& e) {
            throw config_error(e.what());
        }
        if (!cfg.is_object()) throw config_error("config must be a JSON object");
    }
    for (const auto& o : overrides) apply_override(cfg, o);
    return cfg;
}

std::filesystem::path prepare_out(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw config_error("cannot create output directory '" + dir + "'");
    return p;
}

std::string table_csv(const Table& t) {
    std::ostringstream os;
    io::CsvWriter csv(os);
    csv.row(t.header);
    for (const auto& r : t.rows) csv.row(r);
    return os.str();
}

int cmd_specfun_verify(const json& cfg, const std::filesystem::path& out, const std::string& only) {
    double tol_override = get_or<double>(cfg, "tolerance", 0.0);
    std::string select = only.empty() ? get_or<std::string>(cfg, "only", "") : only;
    auto battery = specfun_battery();
    Table t{{"identity", "measured", "expected", "error", "tolerance", "relative", "pass"}, {}};
    json rows = json::array();
    bool all = true;
    std::size_t n = 0;
    for (auto c : battery) {
        if (!select.empty() && c.id != select) continue;
        if (tol_override > 0.0) c.tolerance = tol_override;
        all = all && c.pass();
        ++n;
        t.add(c.id, c.measured, c.expected, c.error, c.tolerance, c.relative, c.pass());
        rows.push_back({{"identity", c.id}, {"error", c.error}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
    }
    if (n == 0) throw config_error("no identity named '" + select + "'");
    io::write_file((out / "specfun_report.csv").string(), table_csv(t));
    io::write_file((out / "specfun_report.json").string(),
                   io::dump_json({{"command", "specfun-verify"}, {"pass", all}, {"identities", rows}}));
    std::cout << n << " identities checked: " << (all ? "pass" : "FAIL") << '\n';
    return all ? kPass : kFail;
}

int cmd_solve(const json& cfg, const std::filesystem::path& out) {
    auto setup = make_problem(cfg);
    Solution sol = solve(setup.problem, setup.grid, setup.options);
    std::ostringstream csv;
    io::write_solution_csv(csv, sol);
    io::write_file((out / "solution.csv").string(), csv.str());

    std::ostringstream coeffs;
    io::CsvWriter cw(coeffs);
    std::vector<std::string> header{"t"};
    for (std::size_t k = 0; k < sol.domain->n_modes(); ++k) header.push_back("mode_" + std::to_string(k + 1));
    cw.row(header);
    for (int n = 0; n <= sol.grid.n_steps; ++n) {
        std::vector<std::string> row{io::format_real(sol.grid.t(n))};
        for (std::size_t k = 0; k < sol.domain->n_modes(); ++k) row.push_back(io::format_real(sol.coefficient(k, n)));
        cw.row(row);
    }
    io::write_file((out / "spectral_coeffs.csv").string(), coeffs.str());
    json meta = io::solution_metadata(sol);
    meta["config"] = cfg;
    io::write_file((out / "solution.json").string(), io::dump_json(meta));
    std::cout << "solved " << to_string(sol.kind) << " alpha=" << sol.alpha << " on " << sol.domain->n_nodes()
              << " nodes, " << sol.grid.n_steps << " steps\n";
    return kPass;
}

int cmd_experiment(const json& cfg, const std::filesystem::path& out, const std::string& name_flag) {
    std::string name = name_flag.empty() ? get_or<std::string>(cfg, "experiment", "") : name_flag;
    const auto& table = experiments();
    auto it = table.find(name);
    if (it == table.end()) {
        std::string known;
        for (const auto& [k, v] : table) known += (known.empty() ? "" : ", ") + k;
        throw config_error("unknown experiment '" + name + "' (known: " + known + ")");
    }
    json params = cfg.contains("params") ? cfg.at("params") : json::object();
    auto r = it->second(params);
    io::write_file((out / (name + ".csv")).string(), table_csv(r.table));
    json summary = r.summary();
    summary["params"] = params;
    io::write_file((out / (name + ".json")).string(), io::dump_json(summary));
    std::cout << name << ": " << (r.pass ? "pass" : "FAIL") << '\n';
    return r.pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional diffusion toolkit"};
    app.require_subcommand(1);
    std::string config, outdir = ".", only, experiment;
    std::vector<std::string> sets;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config, "JSON config file");
        if (config_required) opt->required()->check(CLI::ExistingFile);
        else opt->check(CLI::ExistingFile);
        sub->add_option("--out", outdir, "output directory");
        sub->add_option("--set", sets, "override a config key (key=value, dotted keys allowed)");
    };
    auto* verify = app.add_subcommand("specfun-verify", "run the special-function identity battery");
    add_common(verify, false);
    verify->add_option("--only", only, "check a single identity by id");
    auto* solve_cmd = app.add_subcommand("solve", "solve a time-fractional problem on a spectral domain");
    add_common(solve_cmd, true);
    auto* exp = app.add_subcommand("experiment", "run a named verification experiment");
    add_common(exp, true);
    exp->add_option("name", experiment, "experiment name (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        json cfg = load_config(config, sets);
        auto out = prepare_out(outdir);
        if (*verify) return cmd_specfun_verify(cfg, out, only);
        if (*solve_cmd) return cmd_solve(cfg, out);
        return cmd_experiment(cfg, out, experiment);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const domain_error& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kUsage;
    } catch (const concentration_error& e) {
        std::cerr << "concentration error: " << e.what() << " (last Cauchy distance " << e.best_estimate << ")\n";
        return kFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
}
