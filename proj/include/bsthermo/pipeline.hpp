#pragma once

// Run configuration and the file-producing pipelines behind the command line.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "ldp.hpp"
#include "report.hpp"

namespace bsthermo {

struct RunConfig {
    std::string group{"octagon-genus2"};  // builtin name or path to a JSON spec
    int depth{12};
    std::string beta;        // "a:b:k", empty for the default grid
    std::string alpha_grid;  // "a:b:k", empty for the default grid
    std::size_t samples{100000};
    std::uint64_t seed{1};
    std::string out{"out"};
    std::string orientation{"auto"};
    bool skip_even_corner_gate{false};
    std::vector<int> depths{10, 15, 20, 25, 30};
    std::string interval;  // "a,b", empty for the default J = (alpha_G + margin, alpha+)
};

inline GroupSpec load_group_spec(const std::string& source) {
    for (const auto& n : builtin_names())
        if (n == source) return builtin_spec(n);
    std::ifstream f(source);
    if (!f) throw GroupError("no builtin or readable file named " + source);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw GroupError(std::string("malformed JSON: ") + e.what());
    }
    return parse_group_spec(j);
}

struct Grid {
    double a{0}, b{0};
    int k{0};
};

inline Grid parse_grid(const std::string& s) {
    Grid g;
    char c1 = 0, c2 = 0;
    std::istringstream is(s);
    if (!(is >> g.a >> c1 >> g.b >> c2 >> g.k) || c1 != ':' || c2 != ':' || g.k < 2 || !(g.a < g.b))
        throw std::invalid_argument("grid must look like a:b:k with a < b and k >= 2, got " + s);
    return g;
}

inline Bracket parse_interval(const std::string& s) {
    Bracket J;
    char c = 0;
    std::istringstream is(s);
    if (!(is >> J.lo >> c >> J.hi) || c != ',') throw std::invalid_argument("interval must look like a,b, got " + s);
    return J;
}

inline ConfigHeader config_header(const RunConfig& cfg, const GroupSpec& spec, Orientation o) {
    ConfigHeader h;
    h.set("group", spec.name);
    h.set("group-source", cfg.group);
    h.set("spec-hash", spec_hash(spec));
    h.set("depth", std::to_string(cfg.depth));
    h.set("beta", cfg.beta.empty() ? "default" : cfg.beta);
    h.set("alpha-grid", cfg.alpha_grid.empty() ? "default" : cfg.alpha_grid);
    h.set("samples", std::to_string(cfg.samples));
    h.set("seed", std::to_string(cfg.seed));
    h.set("orientation", std::string(o == Orientation::ccw ? "ccw" : "cw") + (cfg.orientation == "auto" ? " (auto)" : ""));
    h.set("skip-even-corner-gate", cfg.skip_even_corner_gate ? "yes" : "no");
    return h;
}

// Validation trail for `group validate`. Throws GroupError on a hard failure.
struct ValidationTrail {
    std::vector<std::string> lines;
    bool even_corner_pass{true};
    Orientation orientation{Orientation::ccw};
};

inline ValidationTrail validate_group(const GroupSpec& spec, const RunConfig& cfg) {
    ValidationTrail V;
    auto G = build_group<double>(spec);
    V.lines.push_back("build_group: ok, " + std::to_string(G.m) + " sides");
    V.lines.push_back(std::string("kind: ") + (G.first_kind ? "first" : "second"));
    int improper = 0, interior = 0;
    for (const auto& j : G.joints) improper += j.kind == JointKind::gap, interior += j.kind == JointKind::interior;
    V.lines.push_back("vertices: " + std::to_string(interior) + " interior, " + std::to_string(G.num_cusps()) + " cusps, " +
                      std::to_string(improper) + " improper");
    V.lines.push_back(G.has_cusps() ? std::to_string(G.num_cusps()) + " cusps" : "no cusps");
    auto ec = even_corner_check(G);
    V.even_corner_pass = ec.pass;
    if (interior == 0) V.lines.push_back("even corners: pass (no interior vertices)");
    else V.lines.push_back(std::string("even corners: ") + (ec.pass ? "pass" : "fail"));
    for (const auto& v : ec.violations) V.lines.push_back("  " + v);
    if (!ec.pass && !cfg.skip_even_corner_gate) throw GroupError("even-corner check failed");
    if (!ec.pass) V.lines.push_back("warning: even-corner gate skipped");
    auto F = construct_bs<double>(spec, Orientation::ccw);
    if (cfg.orientation == "cw") V.orientation = Orientation::cw;
    else if (cfg.orientation == "auto") {
        auto [o, ok] = resolve_orientation(F);
        V.orientation = o;
        if (!ok) V.lines.push_back("warning: neither orientation's pattern language contains the geometric language");
    }
    V.lines.push_back(std::string("orientation: ") + (V.orientation == Orientation::ccw ? "ccw" : "cw"));
    auto F2 = construct_bs<double>(spec, V.orientation);
    V.lines.push_back("construct_bs: ok, " + std::to_string(F2.branches.size()) + " branches, domain measure " +
                      fmt_num(F2.domain_measure(), 8));
    return V;
}

inline Orientation choose_orientation(const GroupSpec& spec, const RunConfig& cfg) {
    if (cfg.orientation == "ccw") return Orientation::ccw;
    if (cfg.orientation == "cw") return Orientation::cw;
    if (cfg.orientation != "auto") throw std::invalid_argument("orientation must be auto, cw or ccw");
    return resolve_orientation(construct_bs<double>(spec)).first;
}

// ---------------------------------------------------------------- writers

namespace detail {
inline void emit(const std::filesystem::path& dir, const std::string& stem, const CsvTable& t, const ConfigHeader& h,
                 const std::string& kind) {
    write_file(dir / (stem + ".csv"), t.str(h, kind));
}
inline void emit_svg(const std::filesystem::path& dir, const std::string& stem, const Plot& p) {
    write_file(dir / (stem + ".svg"), render_svg(p));
}
}  // namespace detail

inline void write_pressure(const std::filesystem::path& dir, const std::vector<PressurePoint>& curve, const ConfigHeader& h,
                           const DeltaResult& d) {
    CsvTable t({"beta", "P_lo", "P_mid", "P_hi", "method"});
    Series lo{"lower", {}, {}, "#1f77b4", true}, hi{"upper", {}, {}, "#d62728", true}, mid{"estimate", {}, {}, "#000000"};
    for (const auto& p : curve) {
        t.row({fmt_num(p.beta), fmt_num(p.P.lo), fmt_num(p.P.value()), fmt_num(p.P.hi), p.method});
        lo.x.push_back(p.beta), lo.y.push_back(p.P.lo);
        hi.x.push_back(p.beta), hi.y.push_back(p.P.hi);
        mid.x.push_back(p.beta), mid.y.push_back(p.P.value());
    }
    detail::emit(dir, "pressure", t, h, "pressure");
    Plot P{"pressure", "beta", "P(beta)", {lo, hi, mid}, {{0.0, "P = 0"}}, {{d.delta.mid(), "delta"}}};
    detail::emit_svg(dir, "pressure", P);
}

inline void write_spectrum(const std::filesystem::path& dir, const ThermoSummary& S, const ConfigHeader& h) {
    CsvTable t({"alpha", "b", "I"});
    Series b{"b(alpha)", {}, {}, "#1f77b4"}, I{"I(alpha)", {}, {}, "#d62728"};
    for (std::size_t i = 0; i < S.spectrum.points.size(); ++i) {
        const auto& p = S.spectrum.points[i];
        t.row({fmt_num(p.alpha), fmt_num(p.b), fmt_num(S.rate.points[i].I)});
        b.x.push_back(p.alpha), b.y.push_back(p.b);
        I.x.push_back(p.alpha), I.y.push_back(S.rate.points[i].I);
    }
    detail::emit(dir, "spectrum", t, h, "spectrum");
    std::vector<std::pair<double, std::string>> ends{{S.alpha_minus.mid(), "alpha-"}, {S.alpha_plus.mid(), "alpha+"},
                                                    {S.spectrum.alpha_G, "alpha_G"}};
    detail::emit_svg(dir, "spectrum", Plot{"multifractal spectrum", "alpha", "b(alpha)", {b}, {{S.delta.delta.mid(), "delta"}}, ends});
    detail::emit_svg(dir, "rate", Plot{"rate function", "alpha", "I(alpha)", {I}, {{0.0, "0"}}, ends});
}

inline void write_ldp(const std::filesystem::path& dir, const DeviationExperiment& E, const ConfigHeader& h) {
    CsvTable t({"n", "hits", "fraction", "lograte"});
    Series s{"log fraction", {}, {}, "#1f77b4"}, ref{"-inf_J I reference", {}, {}, "#888888", true};
    for (const auto& r : E.rows) {
        t.row({std::to_string(r.n), std::to_string(r.hits), fmt_num(r.fraction), fmt_num(r.lograte)});
        s.x.push_back(r.n);
        s.y.push_back(r.hits ? std::log(r.fraction) : std::numeric_limits<double>::quiet_NaN());
    }
    // reference line through the first used depth with slope -inf_J I
    for (const auto& r : E.rows)
        if (r.used && std::isfinite(E.reference)) {
            for (const auto& q : E.rows) {
                ref.x.push_back(q.n);
                ref.y.push_back(std::log(r.fraction) + E.reference * (q.n - r.n));
            }
            break;
        }
    ConfigHeader hh = h;
    hh.set("interval", fmt_num(E.J.lo) + "," + fmt_num(E.J.hi));
    hh.set("fitted-rate", fmt_num(E.fitted_rate));
    hh.set("reference", fmt_num(E.reference));
    detail::emit(dir, "ldp", t, hh, "ldp");
    detail::emit_svg(dir, "ldp", Plot{"deviation fractions", "n", "log fraction", {s, ref}, {}, {}});
}

// ---------------------------------------------------------------- pipelines

inline AnalysisOptions analysis_options(const RunConfig& cfg) {
    AnalysisOptions ao;
    if (!cfg.beta.empty()) {
        auto g = parse_grid(cfg.beta);
        ao.beta_min = g.a;
        ao.beta_max = g.b;
        ao.beta_points = g.k;
    }
    if (!cfg.alpha_grid.empty()) {
        auto g = parse_grid(cfg.alpha_grid);
        ao.alpha_lo = g.a;
        ao.alpha_hi = g.b;
        ao.alpha_points = g.k;
    }
    return ao;
}

inline ThermoContext<double> context_for(const GroupSpec& spec, const RunConfig& cfg, Orientation o) {
    ThermoOptions opt;
    opt.depth = cfg.depth;
    return make_context<double>(spec, opt, o);
}

inline Bracket default_ldp_interval(const ThermoSummary& S, bool first_kind) {
    double aG = S.spectrum.alpha_G, ap = S.alpha_plus.lo;
    if (first_kind) return {aG - 0.1, aG + 0.1};
    return {aG + 0.1 * (ap - aG), ap};
}

inline DeviationExperiment run_ldp(const ThermoContext<double>& T, const ThermoSummary& S, Bracket J, const RunConfig& cfg) {
    auto E = deviation_rate(T.F, J, cfg.depths, cfg.samples, cfg.seed, Bracket{S.alpha_minus.lo, S.alpha_plus.hi});
    E.reference = -inf_rate(S.rate, J.lo, J.hi);
    return E;
}

struct ReportCheck {
    std::string name;
    bool pass{false};
    std::string detail;
};

struct FullReport {
    std::vector<std::string> summary;
    std::vector<ReportCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

inline FullReport full_report(const RunConfig& cfg) {
    FullReport R;
    auto spec = load_group_spec(cfg.group);
    auto trail = validate_group(spec, cfg);
    Orientation o = trail.orientation;
    auto h = config_header(cfg, spec, o);
    std::filesystem::path dir(cfg.out);
    auto T = context_for(spec, cfg, o);
    const auto& G = T.F.G();

    // invariant suite
    auto inv = check_invariance(T.F, T.C);
    R.checks.push_back({"f(W') in W'", inv.pass, "max mismatch " + fmt_num(inv.max_mismatch, 3)});
    R.checks.push_back({"(M2) images are unions of cells", T.MP.max_image_mismatch < 1e-9, "max mismatch " + fmt_num(T.MP.max_image_mismatch, 3)});

    auto S = analyse(T, analysis_options(cfg));
    write_pressure(dir, S.curve, h, S.delta);
    write_spectrum(dir, S, h);

    const auto& d = S.delta.delta;
    R.summary.push_back("group " + spec.name + " (" + (G.first_kind ? "first" : "second") + " kind, " +
                        std::to_string(G.num_cusps()) + " cusps), spec hash " + spec_hash(spec));
    R.summary.push_back("delta in [" + fmt_num(d.lo, 6) + ", " + fmt_num(d.hi, 6) + "] (" + S.delta.method + ")");
    R.summary.push_back("alpha- in [" + fmt_num(S.alpha_minus.lo, 6) + ", " + fmt_num(S.alpha_minus.hi, 6) + "], alpha+ in [" +
                        fmt_num(S.alpha_plus.lo, 6) + ", " + fmt_num(S.alpha_plus.hi, 6) + "]");
    R.summary.push_back("alpha_G ~ " + fmt_num(S.spectrum.alpha_G, 6) + ", max b = " + fmt_num(S.spectrum.b_max, 6));
    if (G.has_cusps()) R.summary.push_back("alpha- ~ 0 (cusp present)");
    auto P1 = pressure_direct(T, 1.0, cfg.depth).ratio;
    if (!G.first_kind && !G.has_cusps() && P1.hi < 0) R.summary.push_back("P(1) < 0 (P(1) in [" + fmt_num(P1.lo, 6) + ", " + fmt_num(P1.hi, 6) + "])");
    for (const auto& w : S.warnings) R.summary.push_back("warning: " + w);

    if (G.first_kind) R.checks.push_back({"delta bracket contains 1", d.contains(1.0), ""});
    else R.checks.push_back({"delta in (0, 1)", d.lo > 0 && d.hi < 1, ""});
    R.checks.push_back({"alpha- bracket contains 0 iff cusp", S.alpha_minus.contains(0.0) == G.has_cusps(), ""});
    R.checks.push_back({"max b within 0.05 of delta", std::abs(S.spectrum.b_max - d.mid()) <= 0.05, fmt_num(S.spectrum.b_max, 6)});
    if (!G.first_kind && !G.has_cusps()) R.checks.push_back({"P(1) < 0", P1.hi < 0, ""});

    Bracket J = cfg.interval.empty() ? default_ldp_interval(S, G.first_kind) : parse_interval(cfg.interval);
    auto E = run_ldp(T, S, J, cfg);
    write_ldp(dir, E, h);
    R.summary.push_back("LDP on J = (" + fmt_num(J.lo, 6) + ", " + fmt_num(J.hi, 6) + "): fitted rate " + fmt_num(E.fitted_rate, 5) +
                        ", -inf_J I = " + fmt_num(E.reference, 5));

    CsvTable t({"check", "pass", "detail"});
    for (const auto& c : R.checks) t.row({c.name, c.pass ? "yes" : "no", c.detail});
    detail::emit(dir, "checks", t, h, "checks");
    std::ostringstream os;
    os << h.text("summary");
    for (const auto& l : trail.lines) os << "validate: " << l << "\n";
    for (const auto& l : R.summary) os << l << "\n";
    write_file(dir / "summary.txt", os.str());
    return R;
}

}  // namespace bsthermo
