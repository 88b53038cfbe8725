// bsthermo command line: group catalog, tracing, Markov dumps, pressure/spectrum/rate
// curves, LDP runs and the full report.
//
// exit codes: 0 ok, 2 validation failure, 3 acceptance check failed, 4 budget exceeded

#include <CLI11.hpp>
#include <bsthermo/pipeline.hpp>

#include <iostream>

using namespace bsthermo;

namespace {

void add_common(CLI::App* c, RunConfig& cfg) {
    c->add_option("--group", cfg.group, "builtin name or JSON spec path");
    c->add_option("--orientation", cfg.orientation, "auto|cw|ccw")->check(CLI::IsMember({"auto", "cw", "ccw"}));
    c->add_flag("--skip-even-corner-gate", cfg.skip_even_corner_gate, "continue when the even-corner check fails");
    c->add_option("--out", cfg.out, "output directory");
}

void add_thermo(CLI::App* c, RunConfig& cfg) {
    c->add_option("--depth", cfg.depth, "estimator depth n")->check(CLI::Range(1, 40));
    c->add_option("--beta", cfg.beta, "beta grid a:b:k");
    c->add_option("--alpha-grid", cfg.alpha_grid, "alpha grid a:b:k");
}

int cmd_group_list() {
    for (const auto& n : builtin_names()) std::cout << n << "\n";
    return 0;
}

int cmd_group_validate(const RunConfig& cfg) {
    auto spec = load_group_spec(cfg.group);
    auto V = validate_group(spec, cfg);
    std::cout << "group " << spec.name << " (spec hash " << spec_hash(spec) << ")\n";
    for (const auto& l : V.lines) std::cout << "  " << l << "\n";
    return 0;
}

int cmd_group_show(const RunConfig& cfg) {
    auto spec = load_group_spec(cfg.group);
    auto G = build_group<double>(spec);
    nlohmann::json j = to_json(spec);
    j["spec_hash"] = spec_hash(spec);
    j["first_kind"] = G.first_kind;
    j["cusps"] = G.num_cusps();
    j["rotation_step"] = G.rotation_step;
    nlohmann::json cyc = nlohmann::json::array();
    for (const auto& c : G.cycles) {
        nlohmann::json e;
        e["joints"] = c.joints;
        e["cusp"] = c.cusp;
        e["n"] = c.n;
        e["angle_sum"] = double(c.angle_sum);
        e["cw"] = word_string(c.cw);
        cyc.push_back(e);
    }
    j["vertex_cycles"] = cyc;
    nlohmann::json gens = nlohmann::json::array();
    for (int i = 0; i < G.m; ++i)
        gens.push_back({{"letter", i + 1},
                        {"inverse", G.sigma[i] + 1},
                        {"a", {double(std::real(G.gen[i].a)), double(std::imag(G.gen[i].a))}},
                        {"b", {double(std::real(G.gen[i].b)), double(std::imag(G.gen[i].b))}}});
    j["generators"] = gens;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_bs_trace(const RunConfig& cfg, double neg, double pos, int steps) {
    auto spec = load_group_spec(cfg.group);
    auto F = construct_bs<double>(spec, choose_orientation(spec, cfg));
    if (!meets_interior(F, neg, pos)) {
        std::cout << "geodesic does not meet the interior of R\n";
        return 2;
    }
    auto rec = cutting_sequence(F, neg, pos, steps);
    auto e = f_expand(F, pos, steps);
    // cumulative log|(f^k)'| at the forward endpoint
    std::vector<double> lyap;
    double t = pos, acc = 0;
    for (std::size_t k = 0; k < e.word.size(); ++k) {
        acc += F.log_derivative(t);
        t = F.apply(t)->second;
        lyap.push_back(acc);
    }
    std::cout << "cutting sequence: " << word_string(rec.letters) << (rec.escaped ? " (escaped)" : "") << "\n";
    std::cout << "f-expansion:      " << word_string(e.word) << (e.escape_index >= 0 ? " (escaped)" : "") << "\n";
    std::cout << "deformations: " << rec.deformations << "\n";
    CsvTable tab({"k", "letter", "t_k", "lyap_k"});
    for (std::size_t k = 0; k < rec.letters.size(); ++k)
        tab.row({std::to_string(k + 1), "e" + std::to_string(rec.letters[k] + 1), fmt_num(rec.t[k]),
                 k < lyap.size() ? fmt_num(lyap[k]) : "nan"});
    auto h = config_header(cfg, spec, F.forbid);
    h.set("geodesic", fmt_num(neg) + " -> " + fmt_num(pos));
    write_file(std::filesystem::path(cfg.out) / "trace.csv", tab.str(h, "trace"));
    auto P = parallel_check(F, neg, pos, steps);
    std::cout << "parallel check: " << (P.all_pass() ? "pass" : "FAIL") << " over " << P.frames.size() << " frames\n";
    return 0;
}

int cmd_markov_dump(const RunConfig& cfg) {
    auto spec = load_group_spec(cfg.group);
    auto F = construct_bs<double>(spec, choose_orientation(spec, cfg));
    auto C = build_W_prime(F);
    auto inv = check_invariance(F, C);
    if (!inv.pass) {
        for (const auto& o : inv.orphans) std::cerr << "orphan: " << o << "\n";
        return 2;
    }
    auto MP = build_partition(F, C);
    auto h = config_header(cfg, spec, F.forbid);
    h.set("cusp-depth", std::to_string(C.cusp_depth));
    CsvTable t({"cell", "start", "end", "letter", "core", "cusp", "successors"});
    for (int a = 0; a < MP.size(); ++a) {
        std::string succ;
        for (int b : MP.succ[a]) succ += (succ.empty() ? "" : " ") + std::to_string(b);
        t.row({std::to_string(a), fmt_num(MP.cells[a].start), fmt_num(MP.cells[a].end()), "e" + std::to_string(MP.letter[a] + 1),
               MP.core[a] ? "1" : "0", std::to_string(MP.cusp_of[a]), succ});
    }
    write_file(std::filesystem::path(cfg.out) / "markov.csv", t.str(h, "markov"));
    std::cout << MP.size() << " cells, W' has " << C.W_prime.size() << " points, invariance mismatch "
              << fmt_num(inv.max_mismatch, 3) << "\n";
    return 0;
}

int cmd_thermo(const RunConfig& cfg, const std::string& what) {
    auto spec = load_group_spec(cfg.group);
    auto V = validate_group(spec, cfg);
    auto T = context_for(spec, cfg, V.orientation);
    auto h = config_header(cfg, spec, V.orientation);
    auto S = analyse(T, analysis_options(cfg));
    std::filesystem::path dir(cfg.out);
    write_pressure(dir, S.curve, h, S.delta);
    if (what != "pressure") write_spectrum(dir, S, h);
    std::cout << "delta in [" << fmt_num(S.delta.delta.lo, 6) << ", " << fmt_num(S.delta.delta.hi, 6) << "]\n";
    if (what != "pressure")
        std::cout << "alpha_G ~ " << fmt_num(S.spectrum.alpha_G, 6) << ", max b = " << fmt_num(S.spectrum.b_max, 6) << "\n";
    if (what == "rate")
        std::cout << "I slopes: left " << fmt_num(S.rate.left_slope, 4) << ", right " << fmt_num(S.rate.right_slope, 4) << "\n";
    for (const auto& w : S.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_ldp(const RunConfig& cfg) {
    auto spec = load_group_spec(cfg.group);
    auto V = validate_group(spec, cfg);
    auto T = context_for(spec, cfg, V.orientation);
    auto S = analyse(T, analysis_options(cfg));
    Bracket J = cfg.interval.empty() ? default_ldp_interval(S, T.F.first_kind()) : parse_interval(cfg.interval);
    auto E = run_ldp(T, S, J, cfg);
    write_ldp(cfg.out, E, config_header(cfg, spec, V.orientation));
    std::cout << "J = (" << fmt_num(J.lo, 6) << ", " << fmt_num(J.hi, 6) << "), fitted rate " << fmt_num(E.fitted_rate, 5)
              << ", -inf_J I = " << fmt_num(E.reference, 5) << ", depths used " << E.used_depths << "\n";
    return 0;
}

int cmd_full_report(const RunConfig& cfg) {
    auto R = full_report(cfg);
    for (const auto& l : R.summary) std::cout << l << "\n";
    for (const auto& c : R.checks) std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
    return R.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bowen-Series thermodynamics of Fuchsian groups"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string geodesic;
    int steps = 30;
    std::string ivl, depths;

    auto* group = app.add_subcommand("group", "group catalog and validation");
    group->require_subcommand(1);
    auto* g_list = group->add_subcommand("list", "list builtin groups");
    auto* g_val = group->add_subcommand("validate", "validate a group spec");
    auto* g_show = group->add_subcommand("show", "print a group as JSON");
    add_common(g_val, cfg);
    add_common(g_show, cfg);

    auto* bs = app.add_subcommand("bs", "Bowen-Series map");
    bs->require_subcommand(1);
    auto* trace = bs->add_subcommand("trace", "cutting sequence of a geodesic");
    add_common(trace, cfg);
    trace->add_option("--geodesic", geodesic, "backward,forward endpoint angles")->required();
    trace->add_option("--depth", steps, "number of letters")->check(CLI::Range(1, 200));

    auto* markov = app.add_subcommand("markov", "Markov partition");
    markov->require_subcommand(1);
    auto* dump = markov->add_subcommand("dump", "write the partition as CSV");
    add_common(dump, cfg);

    auto* thermo = app.add_subcommand("thermo", "pressure, spectrum and rate curves");
    thermo->require_subcommand(1);
    std::vector<std::pair<CLI::App*, std::string>> th;
    for (const char* w : {"pressure", "spectrum", "rate"}) {
        auto* c = thermo->add_subcommand(w, std::string("write the ") + w + " curve");
        add_common(c, cfg);
        add_thermo(c, cfg);
        th.emplace_back(c, w);
    }

    auto* ldp = app.add_subcommand("ldp", "large deviation experiment");
    ldp->require_subcommand(1);
    auto* run = ldp->add_subcommand("run", "Monte Carlo deviation fractions");
    add_common(run, cfg);
    add_thermo(run, cfg);
    run->add_option("--interval", cfg.interval, "J as a,b");
    run->add_option("--depths", depths, "comma separated depths");
    run->add_option("--samples", cfg.samples, "samples");
    run->add_option("--seed", cfg.seed, "seed");

    auto* full = app.add_subcommand("full-report", "all curves, LDP and invariant checks");
    add_common(full, cfg);
    add_thermo(full, cfg);
    full->add_option("--samples", cfg.samples, "LDP samples");
    full->add_option("--seed", cfg.seed, "LDP seed");
    full->add_option("--interval", cfg.interval, "LDP interval a,b");
    full->add_option("--depths", depths, "LDP depths, comma separated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!depths.empty()) {
            cfg.depths.clear();
            std::stringstream ss(depths);
            std::string tok;
            while (std::getline(ss, tok, ',')) cfg.depths.push_back(std::stoi(tok));
        }
        if (*g_list) return cmd_group_list();
        if (*g_val) return cmd_group_validate(cfg);
        if (*g_show) return cmd_group_show(cfg);
        if (*trace) {
            auto g = parse_interval(geodesic);
            return cmd_bs_trace(cfg, g.lo, g.hi, steps);
        }
        if (*dump) return cmd_markov_dump(cfg);
        for (auto& [c, w] : th)
            if (*c) return cmd_thermo(cfg, w);
        if (*run) return cmd_ldp(cfg);
        if (*full) return cmd_full_report(cfg);
    } catch (const std::length_error& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 4;
    } catch (const GroupError& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        if (std::string(e.what()).find("angle sum") != std::string::npos)
            std::cerr << "hint: a genus-g surface also has a (8g-4)-sided presentation; for genus 2 try a 12-gon whose "
                         "pairing gives vertex cycles of angle sum 2 pi\n";
        return 2;
    } catch (const MarkovError& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
