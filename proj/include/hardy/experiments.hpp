#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hardy/atoms.hpp"
#include "hardy/config.hpp"
#include "hardy/maximal.hpp"
#include "hardy/operators.hpp"
#include "hardy/report.hpp"

namespace hardy {

enum class Scenario { moment_decay, grand_maximal_constant, atom_image, cancellation, duality };

struct ScenarioInfo {
    Scenario id;
    const char* name;
    const char* stem;  ///< default output file stem
};

inline const std::vector<ScenarioInfo>& scenarios() {
    static const std::vector<ScenarioInfo> list{
        {Scenario::moment_decay, "E1-moment-decay", "e1"},
        {Scenario::grand_maximal_constant, "E2-grand-maximal-constant", "e2"},
        {Scenario::atom_image, "E3-atom-image", "e3"},
        {Scenario::cancellation, "E4-cancellation", "e4"},
        {Scenario::duality, "E5-duality", "e5"},
    };
    return list;
}

inline const ScenarioInfo& scenario_info(Scenario s) {
    for (const auto& i : scenarios()) {
        if (i.id == s) return i;
    }
    throw ConfigError("unknown scenario");
}

/// Accepts the full name ("E4-cancellation") or its short tag ("E4", "e4").
inline std::optional<Scenario> parse_scenario(const std::string& text) {
    std::string low;
    for (char c : text) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& i : scenarios()) {
        std::string full;
        for (const char* c = i.name; *c; ++c) full += static_cast<char>(std::tolower(static_cast<unsigned char>(*c)));
        if (low == full || low == i.stem) return i.id;
    }
    return std::nullopt;
}

/// The CSV header each scenario writes, in column order.
inline std::vector<std::string> scenario_header(Scenario s) {
    switch (s) {
        case Scenario::moment_decay:
            return {"scenario", "kind", "p", "dim", "profile", "r", "alpha", "critical", "moment", "hp_norm", "bound", "ratio"};
        case Scenario::grand_maximal_constant:
            return {"scenario", "kind", "p", "dim", "r", "seed", "T", "norm", "model", "slope", "intercept", "r2", "variation"};
        case Scenario::atom_image:
            return {"scenario", "kind", "operator", "p", "dim", "r", "alpha", "c_min", "m1_ratio",
                    "m2_ratio", "moment", "hp_norm", "bound", "ratio", "sensitivity"};
        case Scenario::cancellation:
            return {"scenario", "kind", "operator", "p", "dim", "r", "alpha",
                    "oscillation", "psi", "ratio", "window", "sensitivity", "dual_gap"};
        case Scenario::duality:
            return {"scenario", "kind", "mode", "f", "dim", "instance", "center_x", "center_y",
                    "r", "N", "lhs", "rhs", "gap", "lhs_over_rhs"};
    }
    throw ConfigError("unknown scenario");
}

/**
 * Validated experiment settings. `raw` keeps the parsed file so scenario
 * runners can read their own [params] keys with line-numbered errors.
 */
struct ExperimentConfig {
    Scenario scenario;
    std::uint64_t seed;
    GridSpec grid;
    std::string output;  ///< CSV file name
    std::string chart;   ///< SVG file name, empty for none
    std::string out_dir;
    Config raw;

    static ExperimentConfig from(const Config& c) {
        const std::string tag = c.str("experiment.scenario");
        const auto sc = parse_scenario(tag);
        if (!sc) c.fail_at("experiment.scenario", "unknown scenario '" + tag + "'");
        const long seed = c.integer("experiment.seed", 1);
        if (seed < 0) c.fail_at("experiment.seed", "seed must be non-negative");
        const long dim = c.integer("grid.dim", 1);
        const long m = c.integer("grid.m", 2048);
        const double L = c.num("grid.L", 8.0);
        std::optional<GridSpec> grid;
        try {
            grid.emplace(static_cast<int>(dim), L, static_cast<std::size_t>(std::max(0L, m)));
        } catch (const ConfigError& e) {
            c.fail_at(c.has("grid.m") ? "grid.m" : "grid.dim", e.what());
        }
        const std::string stem = scenario_info(*sc).stem;
        std::string chart = c.str("experiment.chart", stem + ".svg");
        if (chart == "none") chart.clear();
        return ExperimentConfig{*sc,   static_cast<std::uint64_t>(seed), *grid, c.str("experiment.output", stem + ".csv"),
                                chart, c.str("experiment.out_dir", "."),  c};
    }

    HardyIndex index(double p) const {
        try {
            return HardyIndex::make(p, grid.dim());
        } catch (const ConfigError& e) {
            raw.fail_at("params.p", e.what());
        }
    }

    /// Radii ladder under `key`: positive, strictly decreasing, optionally all < 1.
    std::vector<double> ladder(const std::string& key, bool below_one) const {
        const auto r = raw.numbers(key);
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!(r[i] > 0.0)) raw.fail_at(key, "radii must be positive");
            if (below_one && !(r[i] < 1.0)) raw.fail_at(key, "this scenario needs radii < 1");
            if (i > 0 && !(r[i] < r[i - 1])) raw.fail_at(key, "r-ladder must be strictly decreasing");
        }
        return r;
    }

    /// params.alpha if present, else every multi-index of order <= N.
    std::vector<MultiIndex> alphas(const HardyIndex& idx) const {
        if (!raw.has("params.alpha")) {
            const PolySpace space(grid.dim(), idx.N);
            return space.basis();
        }
        auto out = raw.multi_indices("params.alpha", grid.dim());
        for (const auto& a : out) {
            if (a.order() > idx.N) raw.fail_at("params.alpha", "multi-index " + a.str() + " exceeds N_p = " + std::to_string(idx.N));
        }
        return out;
    }

    Point center() const {
        Point x0{0.0, 0.0};
        if (!raw.has("params.x0")) return x0;
        const auto v = raw.numbers("params.x0");
        if (static_cast<int>(v.size()) != grid.dim()) raw.fail_at("params.x0", "x0 needs one coordinate per dimension");
        for (std::size_t a = 0; a < v.size(); ++a) x0[a] = v[a];
        return x0;
    }

    OperatorSpec op() const {
        try {
            return parse_operator(raw.str("params.operator"), grid.dim());
        } catch (const ConfigError& e) {
            if (!raw.has("params.operator")) throw;
            raw.fail_at("params.operator", e.what());
        }
    }

    std::string op_label() const { return raw.str("params.operator"); }
};

struct ExperimentResult {
    Scenario scenario;
    CsvTable table;
    std::optional<SvgChart> chart;
    std::vector<std::string> notes;  ///< one-line summaries for the console
};

namespace detail {

inline std::string alpha_label(const MultiIndex& a) { return a.dim == 1 ? std::to_string(a.e[0]) : a.str(); }

inline CsvTable::Row start_row(Scenario s, const char* kind) {
    CsvTable::Row row;
    row << scenario_info(s).name << kind;
    return row;
}

inline void require_resolved(const GridSpec& g, const Ball& B, std::size_t min_samples) {
    if (!B.inside(g)) throw ConfigError("ball of radius " + format_number(B.radius) + " does not fit inside the grid domain");
    if (ball_indices(g, B).size() < min_samples) {
        throw NumericalError("ball of radius " + format_number(B.radius) + " not resolvable at this grid spacing");
    }
}

/// E1 profiles on B; all but `atom` are normalized to unit mass.
inline GridFunction moment_profile(const std::string& name, const GridSpec& g, const Ball& B, const HardyIndex& idx,
                                   std::uint64_t seed) {
    const int dim = g.dim();
    GridFunction f(g);
    if (name == "indicator") {
        for (auto k : ball_indices(g, B)) f[k] = 1.0;
    } else if (name == "bump") {
        for (auto k : ball_indices(g, B)) f[k] = edge_cutoff((1.0 / B.radius) * (g.point(k) - B.center), dim);
    } else if (name == "random") {
        f = random_bump(g, B, seed);
        f *= cplx{1.0 / lp_norm(f, 1.0), 0.0};
        return f;
    } else if (name == "atom") {
        return make_atom(g, AtomSpec::make(idx, 2.0, B, AtomSpace::local), seed);
    } else {
        throw ConfigError("unknown profile '" + name + "' (expected indicator, bump, random or atom)");
    }
    f *= cplx{1.0 / integrate(f).real(), 0.0};
    return f;
}

inline void note(ExperimentResult& res, const std::string& text) { res.notes.push_back(text); }

}  // namespace detail

// ---------------------------------------------------------------------------
// E1: moment decay of h^p functions on small balls

inline ExperimentResult run_E1_moment_decay(const ExperimentConfig& cfg) {
    const Scenario sc = Scenario::moment_decay;
    ExperimentResult res{sc, CsvTable(scenario_header(sc)), std::nullopt, {}};
    const auto& g = cfg.grid;
    const auto ps = cfg.raw.numbers("params.p");
    const auto radii = cfg.ladder("params.r", true);
    const auto profiles = cfg.raw.has("params.profiles") ? cfg.raw.list("params.profiles")
                                                         : std::vector<std::string>{"indicator", "bump", "random"};
    const Point x0 = cfg.center();
    SvgChart chart;
    chart.title = "moment / (hp_norm * bound) against r";
    chart.x_label = "r";
    chart.y_label = "ratio";
    chart.log_x = chart.log_y = true;

    for (double p : ps) {
        const auto idx = cfg.index(p);
        for (const auto& prof : profiles) {
            std::map<std::string, std::vector<double>> ratios;
            std::vector<std::string> order;
            for (double r : radii) {
                const Ball B{x0, r};
                detail::require_resolved(g, B, 2);
                const auto f = detail::moment_profile(prof, g, B, idx, cfg.seed);
                const auto tab = moment_bound_check(f, B, idx);
                for (const auto& row : tab.rows) {
                    const std::string al = detail::alpha_label(row.alpha);
                    if (!ratios.count(al)) order.push_back(al);
                    ratios[al].push_back(row.ratio);
                    auto out = detail::start_row(sc, "row");
                    out << p << g.dim() << prof << r << al << row.critical << row.moment << tab.hp_norm << row.bound
                        << row.ratio;
                    res.table.add(out);
                }
            }
            for (const auto& al : order) {
                const double s = spread(ratios[al]);
                auto out = detail::start_row(sc, "summary");
                out << p << g.dim() << prof << "" << al << "" << "" << "" << "" << s;
                res.table.add(out);
                chart.add("p=" + format_number(p) + " " + prof + " a=" + al, radii, ratios[al]);
                detail::note(res, "p=" + format_number(p) + " " + prof + " alpha=" + al + ": max/min " + format_number(s));
            }
        }
    }
    res.chart = chart;
    return res;
}

// ---------------------------------------------------------------------------
// E2: growth of the grand maximal constant with the scale cap T

inline ExperimentResult run_E2_grand_maximal_constant(const ExperimentConfig& cfg) {
    const Scenario sc = Scenario::grand_maximal_constant;
    ExperimentResult res{sc, CsvTable(scenario_header(sc)), std::nullopt, {}};
    const auto& g = cfg.grid;
    const auto ps = cfg.raw.numbers("params.p");
    const auto Ts = cfg.raw.numbers("params.T");
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        if (!(Ts[i] > 0.0) || (i > 0 && !(Ts[i] > Ts[i - 1]))) cfg.raw.fail_at("params.T", "T values must be positive and increasing");
    }
    if (Ts.size() < 2) cfg.raw.fail_at("params.T", "at least two T values are needed for a fit");
    const auto radii = cfg.raw.numbers("params.r");
    const long seeds = cfg.raw.integer("params.seeds", 3);
    if (seeds < 1) cfg.raw.fail_at("params.seeds", "seeds must be >= 1");
    const Point x0 = cfg.center();
    SvgChart chart;
    chart.title = "grand maximal norm against T";
    chart.x_label = "T";
    chart.y_label = "norm";
    chart.log_x = chart.log_y = true;

    // Dictionaries depend only on (k, T); build each once.
    std::map<std::pair<int, std::size_t>, TestDictionary> dicts;
    auto dictionary = [&](int k, std::size_t ti) -> const TestDictionary& {
        auto it = dicts.find({k, ti});
        if (it == dicts.end()) it = dicts.emplace(std::make_pair(k, ti), make_dictionary(g.dim(), k, ScaleGrid::for_grid(g, Ts[ti]))).first;
        return it->second;
    };

    for (double p : ps) {
        const auto idx = cfg.index(p);
        const int k = static_cast<int>(cfg.raw.integer("params.k", idx.N + 1));
        for (double r : radii) {
            if (!(r > 0.0)) cfg.raw.fail_at("params.r", "radii must be positive");
            const Ball B{x0, r};
            detail::require_resolved(g, B, 4 * PolySpace(g.dim(), idx.N).size());
            const auto spec = AtomSpec::make(idx, kInfinity, B, AtomSpace::local);
            std::vector<double> mean(Ts.size(), 0.0);
            for (long s = 1; s <= seeds; ++s) {
                const auto a = make_atom(g, spec, cfg.seed * 1000 + static_cast<std::uint64_t>(s));
                for (std::size_t ti = 0; ti < Ts.size(); ++ti) {
                    const double v = detail::quasi_norm(grand_maximal(a, dictionary(k, ti)), p);
                    mean[ti] += v / static_cast<double>(seeds);
                    auto out = detail::start_row(sc, "norm");
                    out << p << g.dim() << r << static_cast<int>(s) << Ts[ti] << v << "" << "" << "" << "" << "";
                    res.table.add(out);
                }
            }
            // Atoms with r >= 1 carry no cancellation: log growth at p = 1, power growth below.
            // Small atoms cancel and should not see T at all.
            std::string model;
            LineFit fit;
            if (r < 1.0) {
                model = "flat";
                fit = fit_log_model(Ts, mean);
            } else if (idx.p == 1.0) {
                model = "log";
                fit = fit_log_model(Ts, mean);
            } else {
                model = "power";
                fit = fit_power_model(Ts, mean);
            }
            const double variation = spread(mean) - 1.0;
            auto out = detail::start_row(sc, "fit");
            out << p << g.dim() << r << "" << "" << "" << model << fit.slope << fit.intercept << fit.r2 << variation;
            res.table.add(out);
            chart.add("p=" + format_number(p) + " r=" + format_number(r), Ts, mean);
            std::string line = "p=" + format_number(p) + " r=" + format_number(r) + " " + model + " fit: slope " +
                               format_number(fit.slope) + ", R2 " + format_number(fit.r2) + ", variation " +
                               format_number(variation);
            if (model == "power") line += " (predicted exponent " + format_number(idx.gamma) + ")";
            detail::note(res, line);
        }
    }
    res.chart = chart;
    return res;
}

// ---------------------------------------------------------------------------
// E3: images of atoms under an operator

inline ExperimentResult run_E3_atom_image(const ExperimentConfig& cfg) {
    const Scenario sc = Scenario::atom_image;
    ExperimentResult res{sc, CsvTable(scenario_header(sc)), std::nullopt, {}};
    const auto& g = cfg.grid;
    const auto T = cfg.op();
    const std::string label = cfg.op_label();
    const auto idx = cfg.index(cfg.raw.num("params.p"));
    const double s = cfg.raw.num("params.s", 2.0);
    const double lambda = cfg.raw.num("params.lambda", g.dim() * (s / idx.p - 1.0) + 1.0);
    const auto radii = cfg.ladder("params.r", true);
    const auto alphas = cfg.alphas(idx);
    const Point x0 = cfg.center();
    try {
        (void)PreMoleculeSpec::make(idx, s, lambda, 1.0, Ball{x0, radii.front()});
        (void)AtomSpec::make(idx, s, Ball{x0, radii.front()}, AtomSpace::local);
    } catch (const ConfigError& e) {
        cfg.raw.fail_at(cfg.raw.has("params.lambda") ? "params.lambda" : "params.s", e.what());
    }
    SvgChart chart;
    chart.title = "atom image under " + label;
    chart.x_label = "r";
    chart.y_label = "constant";
    chart.log_x = chart.log_y = true;

    std::vector<double> cmins;
    std::map<std::string, std::vector<double>> ratios;
    for (double r : radii) {
        const Ball B{x0, r};
        detail::require_resolved(g, B, 4 * PolySpace(g.dim(), idx.N).size());
        const auto a = make_atom(g, AtomSpec::make(idx, s, B, AtomSpace::local), cfg.seed);
        const auto Ta = apply(T, a);
        const auto pm = validate_premolecule(Ta, PreMoleculeSpec::make(idx, s, lambda, 1.0, B));
        const double cmin = std::max(pm.m1_ratio, pm.m2_ratio);
        cmins.push_back(cmin);
        const double hp = hp_norm(Ta, idx, Mollifier::gaussian()).value;
        for (const auto& al : alphas) {
            // ∫ Ta (·−x0)^α = ⟨a, T*[(·−x0)^α]⟩
            const auto ts = tstar_monomial(T, g, x0, al, cancellation_window(r), kInfinity);
            const double mom = std::abs(inner(a, ts.f));
            const bool crit = idx.is_critical_order(al.order());
            const double bound = crit ? std::pow(std::log1p(1.0 / r), -1.0 / idx.p) : 1.0;
            const double ratio = hp > 0.0 ? mom / (hp * bound) : 0.0;
            ratios[detail::alpha_label(al)].push_back(ratio);
            auto out = detail::start_row(sc, "row");
            out << label << idx.p << g.dim() << r << detail::alpha_label(al) << cmin << pm.m1_ratio << pm.m2_ratio << mom
                << hp << bound << ratio << ts.sensitivity;
            res.table.add(out);
        }
    }
    const double cs = spread(cmins);
    auto out = detail::start_row(sc, "summary");
    out << label << idx.p << g.dim() << "" << "" << cs << "" << "" << "" << "" << "" << "" << "";
    res.table.add(out);
    detail::note(res, label + ": c_min max/min " + format_number(cs));
    chart.add("c_min", radii, cmins);
    for (const auto& al : alphas) {
        const auto& v = ratios[detail::alpha_label(al)];
        auto row = detail::start_row(sc, "summary");
        row << label << idx.p << g.dim() << "" << detail::alpha_label(al) << "" << "" << "" << "" << "" << "" << spread(v) << "";
        res.table.add(row);
        chart.add("moment ratio a=" + detail::alpha_label(al), radii, v);
    }
    res.chart = chart;
    return res;
}

// ---------------------------------------------------------------------------
// E4: cancellation of T*[(·−x0)^α] on shrinking balls

inline ExperimentResult run_E4_cancellation(const ExperimentConfig& cfg) {
    const Scenario sc = Scenario::cancellation;
    ExperimentResult res{sc, CsvTable(scenario_header(sc)), std::nullopt, {}};
    const auto& g = cfg.grid;
    const auto T = cfg.op();
    const std::string label = cfg.op_label();
    const auto idx = cfg.index(cfg.raw.num("params.p"));
    const auto radii = cfg.ladder("params.r", true);
    const auto alphas = cfg.alphas(idx);
    const int trials = static_cast<int>(cfg.raw.integer("params.trials", 0));
    const Point x0 = cfg.center();
    std::vector<Ball> balls;
    for (double r : radii) {
        balls.push_back(Ball{x0, r});
        detail::require_resolved(g, balls.back(), 4 * PolySpace(g.dim(), idx.N).size());
    }
    const auto rep = cancellation_test(T, g, idx, balls, alphas, trials);

    SvgChart chart;
    chart.title = "cancellation of T* monomials: " + label;
    chart.x_label = "r";
    chart.y_label = "value";
    chart.log_x = chart.log_y = true;
    std::map<std::string, std::vector<double>> ratio, osc, psis;
    for (const auto& row : rep.rows) {
        const std::string al = detail::alpha_label(row.alpha);
        ratio[al].push_back(row.ratio);
        osc[al].push_back(row.oscillation);
        psis[al].push_back(row.psi_value);
        auto out = detail::start_row(sc, "row");
        out << label << idx.p << g.dim() << row.ball.radius << al << row.oscillation << row.psi_value << row.ratio
            << row.window << row.sensitivity << row.dual_gap;
        res.table.add(out);
    }
    for (const auto& a : alphas) {
        const std::string al = detail::alpha_label(a);
        const auto& v = ratio[al];
        const double s = spread(v);
        const double growth = v.front() > 0.0 ? v.back() / v.front() : 0.0;
        auto o1 = detail::start_row(sc, "spread");
        o1 << label << idx.p << g.dim() << "" << al << "" << "" << s << "" << "" << "";
        res.table.add(o1);
        auto o2 = detail::start_row(sc, "growth");
        o2 << label << idx.p << g.dim() << "" << al << "" << "" << growth << "" << "" << "";
        res.table.add(o2);
        chart.add("ratio a=" + al, radii, v);
        chart.add("psi a=" + al, radii, psis[al]);
        chart.add("oscillation a=" + al, radii, osc[al]);
        detail::note(res, label + " alpha=" + al + ": ratio max/min " + format_number(s) + ", growth " + format_number(growth));
    }
    res.chart = chart;
    return res;
}

// ---------------------------------------------------------------------------
// E5: the dual characterization of the local oscillation

inline ExperimentResult run_E5_duality(const ExperimentConfig& cfg) {
    const Scenario sc = Scenario::duality;
    ExperimentResult res{sc, CsvTable(scenario_header(sc)), std::nullopt, {}};
    const auto& g = cfg.grid;
    const int dim = g.dim();
    const std::string mode = cfg.raw.str("params.mode", "deterministic");
    if (mode != "deterministic" && mode != "random") cfg.raw.fail_at("params.mode", "mode must be deterministic or random");
    const bool random_only = mode == "random";
    const std::string fkind = cfg.raw.str("params.f", "random");
    if (fkind != "random" && fkind != "polynomial") cfg.raw.fail_at("params.f", "f must be random or polynomial");
    const long instances = cfg.raw.integer("params.instances", 50);
    const long N = cfg.raw.integer("params.N", 1);
    const long trials = cfg.raw.integer("params.trials", random_only ? 500 : 0);
    const double rmin = cfg.raw.num("params.r_min", 0.25), rmax = cfg.raw.num("params.r_max", 1.0);
    if (instances < 1) cfg.raw.fail_at("params.instances", "instances must be >= 1");
    if (N < 0 || N > 4) cfg.raw.fail_at("params.N", "N must lie in 0..4");
    if (trials < 0 || (random_only && trials == 0)) cfg.raw.fail_at("params.trials", "random mode needs trials > 0");
    if (!(rmin > 0.0) || rmax < rmin || rmax > 0.5 * g.half_width()) {
        cfg.raw.fail_at("params.r_max", "need 0 < r_min <= r_max <= L/2");
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const PolySpace space(dim, static_cast<int>(N));
    double worst_gap = 0.0, worst_ratio = kInfinity;
    SvgChart chart;
    chart.title = "dual norm: lhs / rhs per instance (" + mode + ")";
    chart.x_label = "instance";
    chart.y_label = "lhs / rhs";
    std::vector<double> xs, ys;
    for (long i = 0; i < instances; ++i) {
        const double r = rmin + 0.5 * (U(rng) + 1.0) * (rmax - rmin);
        Point c{0.0, 0.0};
        for (int a = 0; a < dim; ++a) c[a] = U(rng) * (g.half_width() - r) * 0.9;
        const Ball B{c, r};
        detail::require_resolved(g, B, 4 * space.size());
        const std::uint64_t fseed = rng();
        GridFunction f(g);
        if (fkind == "random") {
            f = GridFunction::sample(g, detail::random_waves(B, dim, fseed));
        } else {
            std::vector<double> coef(space.size());
            for (auto& v : coef) v = U(rng);
            f = GridFunction::sample(g, [&](const Point& y) {
                const Point u = (1.0 / r) * (y - c);
                double v = 0.0;
                for (std::size_t a = 0; a < space.size(); ++a) v += coef[a] * space[a].monomial(u);
                return v;
            });
        }
        const auto chk = dual_norm_check(f, B, static_cast<int>(N), static_cast<int>(trials), rng(), !random_only);
        const double gap = std::abs(chk.lhs - chk.rhs);
        const double scale = lp_norm(f, 2.0, Region::inside(B));
        // Polynomials make both sides vanish; the ratio is reported as 1 there.
        const double ratio = chk.rhs > 1e-12 * std::max(scale, 1.0) ? chk.lhs / chk.rhs : 1.0;
        worst_gap = std::max(worst_gap, gap);
        worst_ratio = std::min(worst_ratio, ratio);
        xs.push_back(static_cast<double>(i));
        ys.push_back(ratio);
        auto out = detail::start_row(sc, "row");
        out << mode << fkind << dim << static_cast<int>(i) << c[0] << c[1] << r << static_cast<int>(N) << chk.lhs << chk.rhs
            << gap << ratio;
        res.table.add(out);
    }
    auto out = detail::start_row(sc, "summary");
    out << mode << fkind << dim << "" << "" << "" << "" << static_cast<int>(N) << "" << "" << worst_gap << worst_ratio;
    res.table.add(out);
    chart.add("lhs / rhs", xs, ys);
    res.chart = chart;
    detail::note(res, mode + " mode: max gap " + format_number(worst_gap) + ", min lhs/rhs " + format_number(worst_ratio));
    return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.scenario) {
        case Scenario::moment_decay: return run_E1_moment_decay(cfg);
        case Scenario::grand_maximal_constant: return run_E2_grand_maximal_constant(cfg);
        case Scenario::atom_image: return run_E3_atom_image(cfg);
        case Scenario::cancellation: return run_E4_cancellation(cfg);
        case Scenario::duality: return run_E5_duality(cfg);
    }
    throw ConfigError("unknown scenario");
}

struct WrittenFiles {
    std::filesystem::path csv;
    std::optional<std::filesystem::path> svg;
};

/// Writes the CSV (and chart, when configured) under out_dir.
inline WrittenFiles write_outputs(const ExperimentResult& res, const ExperimentConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir.empty() ? "." : out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    WrittenFiles files{dir / cfg.output, std::nullopt};
    std::ofstream csv(files.csv, std::ios::binary);
    if (!csv) throw ConfigError("cannot write '" + files.csv.string() + "'");
    res.table.write(csv);
    if (res.chart && !cfg.chart.empty()) {
        files.svg = dir / cfg.chart;
        std::ofstream svg(*files.svg, std::ios::binary);
        if (!svg) throw ConfigError("cannot write '" + files.svg->string() + "'");
        res.chart->write(svg);
    }
    return files;
}

}  // namespace hardy
