#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardy/hardy.hpp"

namespace hardy::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3 };

struct Options {
    std::string config;
    std::string out_dir;
    long seed = -1;
    long grid_m = -1;
    int dim = 0;
    bool quiet = false;

    // validate-atom
    double p = 1.0;
    std::string s = "2";
    double r = 0.25;
    std::string space = "local";
    std::vector<double> x0;
    double L = 4.0;
    std::string atom_file;

    // psi
    std::string psi_p, psi_alpha, psi_t;
};

inline double parse_number(const std::string& text, const std::string& what) {
    if (text == "inf" || text == "infinity") return kInfinity;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(what + " expects a number, got '" + text + "'");
}

/// Out-dir precedence: --out-dir, then HARDY_OUT_DIR, then the config file.
inline std::string resolve_out_dir(const Options& o, const ExperimentConfig& cfg) {
    if (!o.out_dir.empty()) return o.out_dir;
    if (const char* env = std::getenv("HARDY_OUT_DIR"); env && *env) return env;
    return cfg.out_dir;
}

inline int cmd_run(const Options& o, std::ostream& out) {
    if (o.config.empty()) throw ConfigError("run needs a config file");
    Config c = Config::load(o.config);
    if (o.seed >= 0) c.set("experiment.seed", std::to_string(o.seed));
    if (o.grid_m >= 0) c.set("grid.m", std::to_string(o.grid_m));
    if (o.dim > 0) c.set("grid.dim", std::to_string(o.dim));
    const auto cfg = ExperimentConfig::from(c);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run_experiment(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto files = write_outputs(res, cfg, resolve_out_dir(o, cfg));
    if (!o.quiet) {
        out << scenario_info(cfg.scenario).name << ": " << res.table.rows().size() << " rows in " << format_number(secs)
            << " s\n";
        for (const auto& n : res.notes) out << "  " << n << '\n';
        out << "  wrote " << files.csv.string() << '\n';
        if (files.svg) out << "  wrote " << files.svg->string() << '\n';
    }
    return kOk;
}

inline int cmd_list(std::ostream& out) {
    for (const auto& e : builtin_operators()) {
        out << e.name << (e.pathological ? " [pathological]" : "") << (e.translation_invariant ? "" : " [pointwise]")
            << "\n    " << e.summary << '\n';
        if (!e.defaults.empty()) {
            out << "    defaults:";
            for (const auto& [k, v] : e.defaults) out << ' ' << k << '=' << format_number(v);
            out << '\n';
        }
    }
    return kOk;
}

inline int cmd_validate_atom(const Options& o, std::ostream& out) {
    const double s = parse_number(o.s, "--s");
    if (!o.atom_file.empty()) {
        std::ifstream in(o.atom_file, std::ios::binary);
        if (!in) throw ConfigError("cannot open '" + o.atom_file + "'");
        const GridFunction a = io::read_binary(in);
        const int dim = a.spec().dim();
        Point c{0.0, 0.0};
        for (std::size_t i = 0; i < o.x0.size() && i < 2; ++i) c[i] = o.x0[i];
        const auto spec = AtomSpec::make(HardyIndex::make(o.p, dim), s, Ball{c, o.r}, parse_atom_space(o.space));
        const auto rep = validate_atom(a, spec, 1e-8);
        write_report(out, rep);
        return rep.pass ? kOk : kNumericalError;
    }
    const int dim = o.dim > 0 ? o.dim : 1;
    const long m = o.grid_m > 0 ? o.grid_m : (dim == 1 ? 4096 : 128);
    const GridSpec g(dim, o.L, static_cast<std::size_t>(m));
    Point c{0.0, 0.0};
    if (!o.x0.empty() && static_cast<int>(o.x0.size()) != dim) throw ConfigError("--x0 needs one coordinate per dimension");
    for (std::size_t i = 0; i < o.x0.size(); ++i) c[i] = o.x0[i];
    const auto spec = AtomSpec::make(HardyIndex::make(o.p, dim), s, Ball{c, o.r}, parse_atom_space(o.space));
    const auto a = make_atom(g, spec, static_cast<std::uint64_t>(o.seed >= 0 ? o.seed : 1));
    const auto rep = validate_atom(a, spec, 1e-8);
    write_report(out, rep);
    return rep.pass ? kOk : kNumericalError;
}

inline int cmd_psi(const Options& o, std::ostream& out) {
    const double p = parse_number(o.psi_p, "p");
    const double t = parse_number(o.psi_t, "t");
    const int dim = o.psi_alpha.find(',') == std::string::npos ? 1 : 2;
    const auto idx = HardyIndex::make(p, dim);
    out << format_number(psi(idx, parse_multi_index(o.psi_alpha, dim), t)) << '\n';
    return kOk;
}

/// Entry point; returns the process exit code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Options o;
    CLI::App app{"Local Hardy space experiments: moment decay, maximal constants, atoms and cancellation", "hardy"};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "Experiment config file (same as the run argument)");
    app.add_option("--out-dir", o.out_dir, "Directory for CSV/SVG output (overrides HARDY_OUT_DIR)");
    app.add_option("--seed", o.seed, "Override experiment.seed")->check(CLI::NonNegativeNumber);
    app.add_option("--grid-m", o.grid_m, "Override grid.m (points per axis)")->check(CLI::PositiveNumber);
    app.add_option("--dim", o.dim, "Override grid.dim")->check(CLI::IsMember({1, 2}));
    app.add_flag("--quiet", o.quiet, "Suppress console summaries");
    app.fallthrough();

    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", o.config, "Config file");

    app.add_subcommand("list-operators", "List the operator catalog");

    auto* va = app.add_subcommand("validate-atom", "Generate (or load) an atom and validate it");
    va->add_option("file", o.atom_file, "Binary grid function to validate instead of a generated atom");
    va->add_option("--p", o.p, "Hardy exponent p in (0, 1]");
    va->add_option("--s", o.s, "Size exponent s (number or inf)");
    va->add_option("--r", o.r, "Ball radius");
    va->add_option("--space", o.space, "local (h^p) or global (H^p)");
    va->add_option("--x0", o.x0, "Ball center")->expected(1, 2);
    va->add_option("--L", o.L, "Grid half-width");

    auto* ps = app.add_subcommand("psi", "Evaluate the cancellation profile Psi_{p,alpha}(t)");
    ps->add_option("p", o.psi_p)->required();
    ps->add_option("alpha", o.psi_alpha, "Multi-index, e.g. 0 or 1,0 (its length sets the dimension)")->required();
    ps->add_option("t", o.psi_t)->required();

    app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kConfigError;
    }

    try {
        if (run->parsed()) return cmd_run(o, out);
        if (app.got_subcommand("list-operators")) return cmd_list(out);
        if (va->parsed()) return cmd_validate_atom(o, out);
        if (ps->parsed()) return cmd_psi(o, out);
        if (app.got_subcommand("version")) {
            out << "hardy " << kVersion << '\n';
            return kOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    }
    err << app.help();
    return kConfigError;
}

}  // namespace hardy::cli
