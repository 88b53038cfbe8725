#include <bsthermo/thermo.hpp>
#include <gtest/gtest.h>

using namespace bsthermo;

namespace {

const std::string kOct = "octagon-genus2", kSch = "schottky-rank2", kTor = "punctured-torus-ideal-square";

const ThermoContext<double>& ctx(const std::string& name) {
    static std::map<std::string, std::unique_ptr<ThermoContext<double>>> cache;
    auto& p = cache[name];
    if (!p) p.reset(new ThermoContext<double>(make_context<double>(builtin_spec(name))));
    return *p;
}

// log of the spectral radius of the cell transition matrix, by plain power iteration
double log_rho_cells(const MarkovPartition<double>& MP) {
    int N = MP.size();
    std::vector<double> v(N, 1.0);
    double lam = 0;
    for (int it = 0; it < 3000; ++it) {
        std::vector<double> w(N, 0.0);
        for (int a = 0; a < N; ++a)
            for (int b : MP.succ[a]) w[a] += v[b];
        double s = 0;
        for (double x : w) s += x;
        lam = s / std::accumulate(v.begin(), v.end(), 0.0);
        for (auto& x : w) x /= s;
        v.swap(w);
    }
    return std::log(lam);
}

// pressure of a two-letter full shift with constant log-derivatives
double two_branch_pressure(double beta, double a1, double a2) { return std::log(std::exp(-beta * a1) + std::exp(-beta * a2)); }

}  // namespace

TEST(Thermo, BracketHelpers) {
    Bracket b{1, 3};
    EXPECT_EQ(b.mid(), 2);
    EXPECT_EQ(b.value(), 2);
    b.est = 2.5;
    EXPECT_EQ(b.value(), 2.5);
    EXPECT_TRUE(b.contains(3.05, 0.1));
    EXPECT_FALSE(b.contains(3.05));
}

TEST(Thermo, ZeroTemperatureIsTopologicalEntropy) {
    for (const auto& name : {kSch, kTor}) {
        const auto& T = ctx(name);
        auto d = pressure_direct(T, 0.0, 60).ratio;
        double ref = log_rho_cells(T.MP);
        EXPECT_NEAR(d.lo, ref, 1e-6) << name;
        EXPECT_NEAR(d.hi, ref, 1e-6) << name;
    }
    EXPECT_NEAR(log_rho_cells(ctx(kSch).MP), std::log(3.0), 1e-9);
}

TEST(Thermo, DirectPressureIsDecreasingAndConvex) {
    const auto& T = ctx(kSch);
    auto g = linspace(-2, 3, 26);
    std::vector<double> v;
    for (double b : g) {
        auto P = pressure_direct(T, b, 12).ratio;
        EXPECT_LE(P.lo, P.hi + 1e-12);
        v.push_back(P.mid());
    }
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(v[i], v[i - 1]);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) EXPECT_GE(v[i - 1] + v[i + 1] - 2 * v[i], -1e-3);
}

TEST(Thermo, PoincareAgreesWithTransferCounts) {
    // at beta = 0 the Poincare ratio is the growth of the word count
    auto pc = pressure_poincare(ctx(kSch).F, {0.0}, 10);
    EXPECT_NEAR(pc.ratio[0], std::log(3.0), 1e-9);
    auto po = pressure_poincare(ctx(kOct).F, {0.0}, 7);
    EXPECT_NEAR(po.ratio[0], log_rho_cells(ctx(kOct).MP), 0.01);
}

TEST(Thermo, PoincareInsideDirectBracket) {
    const auto& T = ctx(kSch);
    std::vector<double> betas{0.5, 1.0, 1.5};
    auto pc = pressure_poincare(T.F, betas, 12);
    for (std::size_t k = 0; k < betas.size(); ++k) {
        auto d = pressure_direct(T, betas[k], 12).ratio;
        EXPECT_TRUE(d.contains(pc.ratio[k], 0.02)) << betas[k] << ": " << pc.ratio[k] << " vs [" << d.lo << ", " << d.hi << "]";
    }
    EXPECT_THROW(pressure_poincare(T.F, betas, 40, 1e6), std::length_error);
}

TEST(Thermo, TailSumMatchesDirectSum) {
    // oracle: the sum carried to ten times as many terms by hand
    for (double beta : {0.8, 1.2}) {
        for (double p : {0.0, 0.01}) {
            double s = 0;
            for (int t = 401; t <= 4000000; ++t) s += std::pow(t / 400.0, -2 * beta) * std::exp(-p * t);
            double rest = p > 0 ? 0 : 4000000.0 * std::pow(4000000.0 / 400.0, -2 * beta) / (2 * beta - 1);
            EXPECT_NEAR(tail_sum(beta, p, 400), s + rest, 1e-3 * (s + rest)) << beta << " " << p;
        }
    }
    EXPECT_TRUE(std::isinf(tail_sum(0.5, 0.0, 400)));
}

TEST(Thermo, InducedPressureDecreasesInP) {
    const auto& T = ctx(kTor);
    double prev = 1e300;
    for (double p : {0.0, 0.05, 0.1, 0.2, 0.4}) {
        auto b = induced_pressure(T, 0.8, p);
        EXPECT_LE(b.lo, b.est + 1e-12);
        EXPECT_LE(b.est, b.hi + 1e-12);
        EXPECT_LT(b.hi, prev);
        prev = b.hi;
    }
    EXPECT_THROW(induced_pressure(T, 0.8, -0.1), SummabilityError);
    EXPECT_THROW(induced_pressure(ctx(kSch), 0.8, 0.1), std::logic_error);
}

// The root p of the induced pressure is the pressure itself.
TEST(Thermo, InducedRootIsThePressure) {
    const auto& T = ctx(kTor);
    auto r = pressure_via_induced(T, 0.5);
    EXPECT_FALSE(r.boundary);
    EXPECT_GT(r.p.lo, 0);
    auto d = pressure_direct(T, 0.5, 12).ratio;
    EXPECT_NEAR(r.p.value(), d.mid(), 0.02);
    auto e = induced_pressure(T, 0.5, d.mid());
    EXPECT_NEAR(e.est, 0.0, 0.02);

    auto hot = pressure_via_induced(T, 1.2);
    EXPECT_TRUE(hot.boundary);
    EXPECT_EQ(hot.p.hi, 0.0);
}

TEST(Thermo, DeltaBrackets) {
    auto s10 = delta_G(ctx(kSch), 10), s12 = delta_G(ctx(kSch), 12);
    EXPECT_GT(s12.delta.lo, 0);
    EXPECT_LT(s12.delta.hi, 1);
    // deeper brackets overlap the shallower ones
    EXPECT_LE(s12.delta.lo, s10.delta.hi);
    EXPECT_GE(s12.delta.hi, s10.delta.lo);

    auto o = delta_G(ctx(kOct), 8);
    EXPECT_TRUE(o.delta.contains(1.0));
    auto t = delta_G(ctx(kTor));
    EXPECT_EQ(t.method, "induced");
    EXPECT_TRUE(t.delta.contains(1.0));
}

// Karp on a hand-made graph against brute force over its simple cycles.
TEST(Thermo, KarpMatchesBruteForce) {
    Refinement<double> R;
    R.paths = {{0}, {1}, {2}, {3}};
    R.arcs.resize(4);
    using E = Refinement<double>::Edge;
    R.edges = {{E{1, 1.0, 1.5}, E{2, 2.0, 2.0}}, {E{0, 3.0, 3.5}, E{2, 0.5, 0.75}}, {E{3, 1.0, 1.0}}, {E{0, 0.2, 0.4}, E{1, 4.0, 4.0}}};
    // simple cycles: 0-1-0, 0-2-3-0, 0-1-2-3-0, 1-2-3-1, 0-2-3-1-0
    auto means = [&](bool hi) {
        auto w = [&](int a, int b) {
            for (const auto& e : R.edges[a])
                if (e.to == b) return hi ? e.log_hi : e.log_lo;
            return 1e300;
        };
        std::vector<std::vector<int>> cycles{{0, 1}, {0, 2, 3}, {0, 1, 2, 3}, {1, 2, 3}, {0, 2, 3, 1}};
        std::vector<double> out;
        for (const auto& c : cycles) {
            double s = 0;
            for (std::size_t i = 0; i < c.size(); ++i) s += w(c[i], c[(i + 1) % c.size()]);
            out.push_back(s / c.size());
        }
        return out;
    };
    for (bool hi : {false, true}) {
        auto m = means(hi);
        EXPECT_NEAR(karp_min_mean(R, hi, false), *std::min_element(m.begin(), m.end()), 1e-12);
        EXPECT_NEAR(karp_min_mean(R, hi, true), *std::max_element(m.begin(), m.end()), 1e-12);
    }
}

TEST(Thermo, AlphaEndpoints) {
    auto lo = alpha_endpoints_cycle(ctx(kSch), false), hi = alpha_endpoints_cycle(ctx(kSch), true);
    EXPECT_GT(lo.value.lo, 0.05);
    EXPECT_LT(lo.value.hi, hi.value.lo);
    auto t = alpha_endpoints_cycle(ctx(kTor), false);
    EXPECT_TRUE(t.value.contains(0.0));
}

// Legendre transform against the closed form for two constant branches:
// b(alpha) alpha = H(q) with q a1 + (1 - q) a2 = alpha.
TEST(Thermo, SpectrumOfTwoBranchShift) {
    const double a1 = 1.0, a2 = 2.0;
    std::vector<PressurePoint> curve;
    for (double b : linspace(-4, 6, 201)) {
        double v = two_branch_pressure(b, a1, a2);
        curve.push_back({b, Bracket{v, v}, "exact"});
    }
    auto alphas = linspace(1.2, 1.8, 13);
    auto S = spectrum(curve, alphas, Bracket{a1, a1}, Bracket{a2, a2});
    ASSERT_EQ(S.points.size(), alphas.size());
    for (const auto& p : S.points) {
        double q = (a2 - p.alpha) / (a2 - a1);
        double H = -q * std::log(q) - (1 - q) * std::log(1 - q);
        EXPECT_NEAR(p.b, H / p.alpha, 2e-4) << p.alpha;
        // the minimiser is the slope parameter: -P'(beta*) = alpha
        double h = 1e-5;
        double dP = (two_branch_pressure(p.beta_star + h, a1, a2) - two_branch_pressure(p.beta_star - h, a1, a2)) / (2 * h);
        EXPECT_NEAR(-dP, p.alpha, 5e-3);
    }
    // max b is the root of P
    double delta = 0;
    {
        double lo = 0, hi = 3;
        for (int i = 0; i < 100; ++i) (two_branch_pressure(0.5 * (lo + hi), a1, a2) > 0 ? lo : hi) = 0.5 * (lo + hi);
        delta = 0.5 * (lo + hi);
    }
    EXPECT_NEAR(S.b_max, delta, 0.01);

    auto R = rate(S);
    EXPECT_EQ(R.convexity_violations, 0);
    for (std::size_t i = 0; i < R.points.size(); ++i) EXPECT_NEAR(R.points[i].I, S.points[i].alpha * (1 - S.points[i].b), 1e-12);
    double m = inf_rate(R, 1.3, 1.5);
    for (const auto& p : R.points)
        if (p.alpha > 1.3 && p.alpha < 1.5) EXPECT_LE(m, p.I);
}

TEST(Thermo, SpectrumOmitsPointsOutsideTheRange) {
    std::vector<PressurePoint> curve;
    for (double b : linspace(-1, 3, 81)) {
        double v = two_branch_pressure(b, 1.0, 2.0);
        curve.push_back({b, Bracket{v, v}, "exact"});
    }
    auto S = spectrum(curve, {0.5, 1.5, 2.5}, Bracket{1, 1}, Bracket{2, 2});
    EXPECT_EQ(S.points.size(), 1u);
    EXPECT_EQ(S.omitted, 2);
}
