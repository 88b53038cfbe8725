#pragma once

// Pressure, dimension, multifractal spectrum and rate function.

#include <array>
#include <cmath>
// pchip.hpp calls isnan unqualified
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <limits>

#include "markov.hpp"

namespace bsthermo {

struct Bracket {
    double lo{0}, hi{0};
    double est{std::numeric_limits<double>::quiet_NaN()};  // point estimate when one is available
    double mid() const { return 0.5 * (lo + hi); }
    double value() const { return std::isfinite(est) ? est : mid(); }
    double width() const { return hi - lo; }
    bool contains(double x, double slack = 0) const { return lo - slack <= x && x <= hi + slack; }
};

struct ThermoOptions {
    int depth{12};                       // n for the direct and Poincare estimators
    std::size_t state_budget{60000};     // refinement size for the direct matrices
    int induced_k{2};
    int n_max{400};
    double tail_safety{1.5};
    double induced_switch{0.6};          // use induced values for beta > switch * delta_hi
    bool allow_critical_tail{false};     // allow p = 0 with 2 beta <= 1 (divergent tail)
};

// Everything the estimators share, built once per group.
template <class Real>
struct ThermoContext {
    BSMap<Real> F;
    CuspCombinatorics<Real> C;
    MarkovPartition<Real> MP;
    Refinement<Real> R;
    std::optional<InducedSystem> induced;
    ThermoOptions opt;
    bool cusped() const { return F.G().has_cusps(); }
};

template <class Real>
ThermoContext<Real> make_context(const GroupSpec& spec, ThermoOptions opt = {}, Orientation o = Orientation::ccw) {
    ThermoContext<Real> T{construct_bs<Real>(spec, o), {}, {}, {}, std::nullopt, opt};
    T.C = build_W_prime(T.F);
    auto inv = check_invariance(T.F, T.C);
    if (!inv.pass) throw MarkovError(inv.orphans.front());
    T.MP = build_partition(T.F, T.C);
    T.R = refine(T.F, T.MP, auto_refinement_depth(T.MP, opt.state_budget));
    if (T.cusped()) T.induced = build_induced(T.F, T.MP, opt.n_max, opt.induced_k);
    return T;
}

// ---------------------------------------------------------------- direct pressure

struct DirectPressure {
    Bracket ratio;    // log Z_n - log Z_{n-1}
    Bracket average;  // (1/n) log Z_n
};

namespace detail {

// Z_j = 1^T M^j 1 with edge weights w; returns (log Z_n - log Z_{n-1}, log Z_n)
template <class Real, class Weight>
std::pair<double, double> weighted_sums(const Refinement<Real>& R, int n, Weight&& w) {
    const int N = R.size();
    std::vector<double> v(N, 1.0), nx(N);
    double logZ = std::log(double(N)), prev = 0;
    for (int j = 1; j <= n; ++j) {
        double s = 0;
        for (int u = 0; u < N; ++u) {
            double acc = 0;
            for (const auto& e : R.edges[u]) acc += w(e) * v[e.to];
            nx[u] = acc;
            s += acc;
        }
        if (!(s > 0) || !std::isfinite(s)) throw std::overflow_error("weighted sum degenerate");
        // v holds M^j 1 scaled so that the previous sum was 1
        double old = 0;
        for (double x : v) old += x;
        prev = logZ;
        logZ += std::log(s / old);
        for (int u = 0; u < N; ++u) v[u] = nx[u] / s;
    }
    return {logZ - prev, logZ};
}

}  // namespace detail

template <class Real>
DirectPressure pressure_direct(const ThermoContext<Real>& T, double beta, int n) {
    if (n < 1) throw std::invalid_argument("depth must be positive");
    auto lo_w = [beta](const typename Refinement<Real>::Edge& e) { return std::exp(-beta * (beta >= 0 ? e.log_hi : e.log_lo)); };
    auto hi_w = [beta](const typename Refinement<Real>::Edge& e) { return std::exp(-beta * (beta >= 0 ? e.log_lo : e.log_hi)); };
    auto [rl, zl] = detail::weighted_sums(T.R, n, lo_w);
    auto [rh, zh] = detail::weighted_sums(T.R, n, hi_w);
    DirectPressure out;
    out.ratio = {rl, rh};
    out.average = {zl / n, zh / n};
    return out;
}

// ---------------------------------------------------------------- Poincare series

struct PoincareResult {
    std::vector<double> beta;
    std::vector<double> ratio;    // log S_n - log S_{n-1}
    std::vector<double> average;  // (1/n) log S_n
    double words{0};
};

// S_j(beta) = sum over admissible words of length j of exp(-beta d(0, w(0))).
// Rotation symmetry of the polygon lets one first letter per orbit stand for its orbit.
namespace detail {

struct PoincareWalker {
    using C = std::complex<double>;
    int n{0}, m{0};
    std::vector<std::array<int, 64>> next;
    std::vector<C> ga, gb, gbc, gac;
    std::vector<double> betas;
    std::vector<int> half;  // 2 beta when all betas are small half-integers, else empty
    std::vector<double> Sn, Sm;
    double words{0};

    void add(std::vector<double>& S, const C& a, const C& b, double mult) {
        double s = std::sqrt(std::norm(a)) + std::sqrt(std::norm(b));
        if (!half.empty()) {
            double inv = 1.0 / s, pw[9];
            pw[0] = 1;
            for (int j = 1; j < 9; ++j) pw[j] = pw[j - 1] * inv;
            for (std::size_t k = 0; k < half.size(); ++k) S[k] += mult * pw[half[k]];
        } else {
            double ls = std::log(s);
            for (std::size_t k = 0; k < betas.size(); ++k) S[k] += mult * std::exp(-2 * betas[k] * ls);
        }
    }

    void leaves(int s, const C& a, const C& b, double mult) {
        add(Sm, a, b, mult);
        const auto& nx = next[s];
        if (!half.empty() && half.size() <= 3) {
            // inlined hot loop: the last level carries almost all the work
            double acc[3] = {0, 0, 0};
            double cnt = 0;
            for (int x = 0; x < m; ++x) {
                if (nx[x] < 0) continue;
                C a2 = a * ga[x] + b * gbc[x];
                C b2 = a * gb[x] + b * gac[x];
                double inv = 1.0 / (std::sqrt(std::norm(a2)) + std::sqrt(std::norm(b2)));
                for (std::size_t k = 0; k < half.size(); ++k) {
                    double w = 1;
                    for (int j = 0; j < half[k]; ++j) w *= inv;
                    acc[k] += w;
                }
                cnt += 1;
            }
            for (std::size_t k = 0; k < half.size(); ++k) Sn[k] += mult * acc[k];
            words += mult * cnt;
            return;
        }
        for (int x = 0; x < m; ++x) {
            if (nx[x] < 0) continue;
            add(Sn, a * ga[x] + b * gbc[x], a * gb[x] + b * gac[x], mult);
            words += mult;
        }
    }

    void walk(int s, int depth, const C& a, const C& b, double mult) {
        if (depth == n - 1) return leaves(s, a, b, mult);
        const auto& nx = next[s];
        for (int x = 0; x < m; ++x) {
            int t = nx[x];
            if (t < 0) continue;
            walk(t, depth + 1, a * ga[x] + b * gbc[x], a * gb[x] + b * gac[x], mult);
        }
    }
};

}  // namespace detail

template <class Real>
PoincareResult pressure_poincare(const BSMap<Real>& F, const std::vector<double>& betas, int n, double leaf_budget = 5e9) {
    using C = std::complex<double>;
    if (n < 1) throw std::invalid_argument("depth must be positive");
    const auto& G = F.G();
    if (G.m > 64) throw std::invalid_argument("too many sides for the Poincare walker");
    auto A = admissible_language(F);
    auto counts = A.counts(n);
    int r = G.rotation_step;
    int orbit = r > 0 ? G.m / r : 1;
    if (counts[n] / orbit > leaf_budget) throw std::length_error("Poincare enumeration exceeds budget");

    detail::PoincareWalker W;
    W.n = n;
    W.m = G.m;
    W.betas = betas;
    bool halves = true;
    for (double b : betas) halves = halves && b >= 0 && b <= 4 && std::abs(2 * b - std::round(2 * b)) < 1e-15;
    if (halves)
        for (double b : betas) W.half.push_back((int)std::lround(2 * b));
    W.next.resize(A.size());
    for (int s = 0; s < A.size(); ++s) {
        W.next[s].fill(-1);
        for (int x = 0; x < G.m; ++x) W.next[s][x] = A.next[s][x];
    }
    for (int x = 0; x < G.m; ++x) {
        C a(double(std::real(G.gen[x].a)), double(std::imag(G.gen[x].a)));
        C b(double(std::real(G.gen[x].b)), double(std::imag(G.gen[x].b)));
        W.ga.push_back(a);
        W.gb.push_back(b);
        W.gac.push_back(std::conj(a));
        W.gbc.push_back(std::conj(b));
    }
    W.Sn.assign(betas.size(), 0.0);
    W.Sm.assign(betas.size(), 0.0);
    if (n == 1) {
        W.leaves(A.start, C(1), C(0), 1.0);
    } else if (r > 0) {
        for (int x = 0; x < r; ++x) {
            int t = A.next[A.start][x];
            if (t >= 0) W.walk(t, 1, W.ga[x], W.gb[x], double(orbit));
        }
    } else {
        W.walk(A.start, 0, C(1), C(0), 1.0);
    }
    PoincareResult out;
    out.beta = betas;
    out.words = W.words;
    for (std::size_t k = 0; k < betas.size(); ++k) {
        out.ratio.push_back(std::log(W.Sn[k]) - std::log(W.Sm[k]));
        out.average.push_back(std::log(W.Sn[k]) / n);
    }
    return out;
}

// ---------------------------------------------------------------- induced pressure

class SummabilityError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

inline double spectral_radius(const std::vector<std::vector<double>>& M, int iters = 2000, double tol = 1e-13) {
    const int N = (int)M.size();
    if (N == 0) return 0;
    std::vector<double> v(N, 1.0), w(N);
    double lam = 0;
    for (int it = 0; it < iters; ++it) {
        double s = 0;
        for (int i = 0; i < N; ++i) {
            double acc = 0;
            for (int j = 0; j < N; ++j) acc += M[i][j] * v[j];
            // a small shift keeps periodic matrices from oscillating
            w[i] = acc + v[i];
            s += w[i];
        }
        double nl = s / std::accumulate(v.begin(), v.end(), 0.0) - 1.0;
        for (int i = 0; i < N; ++i) v[i] = w[i] / s;
        if (it > 10 && std::abs(nl - lam) < tol * std::max(1.0, std::abs(nl))) return nl;
        lam = nl;
    }
    return lam;
}

// Sum over t > N of (t/N)^{-2 beta} e^{-p t}; infinite when it diverges.
inline double tail_sum(double beta, double p, int N) {
    if (p < 0) return std::numeric_limits<double>::infinity();
    if (p == 0 && 2 * beta <= 1) return std::numeric_limits<double>::infinity();
    double s = 0;
    for (int t = N + 1; t <= N + 200000; ++t) {
        double term = std::pow(double(t) / N, -2 * beta) * std::exp(-p * t);
        s += term;
        if (term < 1e-16 * s) return s;
    }
    // remaining part by the integral bound
    double t0 = N + 200000.0;
    if (p > 0) return s + std::pow(t0 / N, -2 * beta) * std::exp(-p * t0) / p;
    return s + t0 * std::pow(t0 / N, -2 * beta) / (2 * beta - 1);
}

// Induced pressure log rho of the branch-weight matrix. The lower value ignores branches
// past N_max; the upper one adds the n^{-2 beta} e^{-p n} tail anchored at the last time,
// scaled by the safety factor. The estimate uses midpoint log-derivatives and the bare tail.
template <class Real>
Bracket induced_pressure(const ThermoContext<Real>& T, double beta, double p) {
    if (!T.induced) throw std::logic_error("group has no cusps");
    const auto& S = *T.induced;
    if (p < 0) throw SummabilityError("outside summability region: p < 0");
    if (p == 0 && 2 * beta <= 1 && !T.opt.allow_critical_tail)
        throw SummabilityError("outside summability region: p = 0 needs beta > 1/2");
    const int N = S.size();
    std::vector<std::vector<double>> lo(N, std::vector<double>(N, 0.0)), hi = lo, est = lo, anchor = lo, anchor_est = lo;
    for (const auto& b : S.branches) {
        double wl = std::exp(-beta * (beta >= 0 ? b.log_hi : b.log_lo) - p * b.time);
        double wh = std::exp(-beta * (beta >= 0 ? b.log_lo : b.log_hi) - p * b.time);
        double wm = std::exp(-beta * 0.5 * (b.log_lo + b.log_hi) - p * b.time);
        lo[b.from][b.to] += wl;
        hi[b.from][b.to] += wh;
        est[b.from][b.to] += wm;
        if (b.time == S.n_max) {
            anchor[b.from][b.to] += std::exp(-beta * (beta >= 0 ? b.log_lo : b.log_hi));
            anchor_est[b.from][b.to] += std::exp(-beta * 0.5 * (b.log_lo + b.log_hi));
        }
    }
    double tail = tail_sum(beta, p, S.n_max);
    if (!std::isfinite(tail)) throw SummabilityError("tail diverges");
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            hi[i][j] += T.opt.tail_safety * anchor[i][j] * tail;
            est[i][j] += anchor_est[i][j] * tail;
        }
    return {std::log(spectral_radius(lo)), std::log(spectral_radius(hi)), std::log(spectral_radius(est))};
}

struct InducedRoot {
    bool boundary{false};  // P = 0 regime: no positive root
    Bracket p;
};

// Root in p of the induced pressure. Each bracket end solves its own curve; both are
// decreasing in p.
template <class Real>
InducedRoot pressure_via_induced(const ThermoContext<Real>& T, double beta, double tol = 1e-9) {
    InducedRoot out;
    if (!T.induced || T.induced->trivial) {
        auto d = pressure_direct(T, beta, T.opt.depth);
        out.p = d.ratio;
        return out;
    }
    auto root = [&](int which) -> double {
        auto val = [&](double p) {
            auto b = induced_pressure(T, beta, p);
            return which == 0 ? b.lo : which == 1 ? b.hi : b.est;
        };
        double p0 = 2 * beta > 1 ? 0.0 : 1e-12;
        double v0 = val(p0);
        if (v0 <= 0) return 0.0;
        double a = p0, b = 0.25;
        while (val(b) > 0) {
            a = b;
            b *= 2;
            if (b > 1e3) throw std::runtime_error("induced pressure root not bracketed");
        }
        while (b - a > tol) {
            double c = 0.5 * (a + b);
            (val(c) > 0 ? a : b) = c;
        }
        return 0.5 * (a + b);
    };
    out.p = {root(0), root(1), root(2)};
    out.boundary = out.p.hi == 0.0;
    return out;
}

// ---------------------------------------------------------------- dimension

struct DeltaResult {
    Bracket delta;
    std::string method;
};

namespace detail {
template <class Fn>
double decreasing_root(Fn&& f, double a, double b, double tol = 1e-10) {
    double fa = f(a), fb = f(b);
    if (fa <= 0) return a;
    if (fb > 0) return b;
    while (b - a > tol) {
        double c = 0.5 * (a + b);
        (f(c) > 0 ? a : b) = c;
    }
    return 0.5 * (a + b);
}
}  // namespace detail

template <class Real>
DeltaResult delta_G(const ThermoContext<Real>& T, int n = -1) {
    if (n < 0) n = T.opt.depth;
    DeltaResult out;
    double p0 = pressure_direct(T, 0.0, n).ratio.hi;
    if (p0 <= 0) throw std::runtime_error("degenerate group: P(0) <= 0");
    if (T.cusped()) {
        out.method = "induced";
        out.delta.lo = detail::decreasing_root([&](double b) { return induced_pressure(T, b, 0.0).lo; }, 0.5 + 1e-6, 2.0);
        out.delta.hi = detail::decreasing_root([&](double b) { return induced_pressure(T, b, 0.0).hi; }, 0.5 + 1e-6, 2.0);
        out.delta.est = detail::decreasing_root([&](double b) { return induced_pressure(T, b, 0.0).est; }, 0.5 + 1e-6, 2.0);
    } else {
        out.method = "direct";
        out.delta.lo = detail::decreasing_root([&](double b) { return pressure_direct(T, b, n).ratio.lo; }, 0.0, 3.0);
        out.delta.hi = detail::decreasing_root([&](double b) { return pressure_direct(T, b, n).ratio.hi; }, 0.0, 3.0);
    }
    return out;
}

// ---------------------------------------------------------------- pressure curve

struct PressurePoint {
    double beta{0};
    Bracket P;
    std::string method;
};

template <class Real>
class PressureModel {
  public:
    PressureModel(const ThermoContext<Real>& T, Bracket delta) : T_(T), delta_(delta) {}

    PressurePoint eval(double beta) const {
        PressurePoint pt;
        pt.beta = beta;
        if (T_.cusped() && beta > T_.opt.induced_switch * delta_.hi) {
            auto r = pressure_via_induced(T_, beta);
            pt.P = r.p;
            pt.method = r.boundary ? "induced-boundary" : "induced";
        } else {
            pt.P = pressure_direct(T_, beta, T_.opt.depth).ratio;
            pt.method = "direct";
        }
        return pt;
    }
    double value(double beta) const { return eval(beta).P.value(); }
    const Bracket& delta() const { return delta_; }

  private:
    const ThermoContext<Real>& T_;
    Bracket delta_;
};

template <class Real>
std::vector<PressurePoint> pressure_curve(const PressureModel<Real>& model, const std::vector<double>& grid) {
    std::vector<PressurePoint> out;
    for (double b : grid) out.push_back(model.eval(b));
    return out;
}

inline std::vector<double> linspace(double a, double b, int k) {
    std::vector<double> g;
    for (int i = 0; i < k; ++i) g.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
    return g;
}

// ---------------------------------------------------------------- cycle means

struct CycleMean {
    Bracket value;
    int k{1};
};

// Karp's minimum mean cycle over the edges of a refinement, for one weight choice.
template <class Real>
double karp_min_mean(const Refinement<Real>& R, bool use_hi, bool maximize) {
    const int N = R.size();
    const double inf = std::numeric_limits<double>::infinity();
    // D[k][v]: min weight of a k-edge walk ending at v, from a virtual source joined to all
    std::vector<std::vector<double>> D(N + 1, std::vector<double>(N, inf));
    for (int v = 0; v < N; ++v) D[0][v] = 0;
    for (int k = 1; k <= N; ++k)
        for (int u = 0; u < N; ++u) {
            double du = D[k - 1][u];
            if (du == inf) continue;
            for (const auto& e : R.edges[u]) {
                double w = use_hi ? e.log_hi : e.log_lo;
                if (maximize) w = -w;
                D[k][e.to] = std::min(D[k][e.to], du + w);
            }
        }
    double best = inf;
    for (int v = 0; v < N; ++v) {
        if (D[N][v] == inf) continue;
        double worst = -inf;
        for (int k = 0; k < N; ++k)
            if (D[k][v] < inf) worst = std::max(worst, (D[N][v] - D[k][v]) / (N - k));
        best = std::min(best, worst);
    }
    return maximize ? -best : best;
}

// alpha^- (min) and alpha^+ (max) as extreme mean Lyapunov exponents of periodic orbits.
// The inf and sup weights bracket the true cycle means.
template <class Real>
CycleMean alpha_endpoints_cycle(const ThermoContext<Real>& T, bool max_end, double ve_budget = 1e8) {
    int k = 1;
    while (k < 6) {
        double V = (double)count_paths(T.MP, k + 1), E = (double)count_paths(T.MP, k + 2);
        if (V * E > ve_budget) break;
        ++k;
    }
    auto R = refine(T.F, T.MP, k);
    CycleMean out;
    out.k = k;
    out.value = {karp_min_mean(R, false, max_end), karp_min_mean(R, true, max_end)};
    return out;
}

// ---------------------------------------------------------------- spectrum and rate

struct SpectrumPoint {
    double alpha{0};
    double b{0};
    double beta_star{0};
};

struct SpectrumCurve {
    Bracket alpha_minus, alpha_plus;
    double alpha_G{0};
    double b_max{0};
    std::vector<SpectrumPoint> points;  // interior points only
    int omitted{0};
};

// b(alpha) = (1/alpha) inf_beta (P(beta) + beta alpha) over the sampled curve (point
// estimates). The grid minimum is refined by golden section on a monotone cubic (PCHIP)
// through the samples, inside the winning grid interval. The grid may be non-uniform.
inline SpectrumCurve spectrum(const std::vector<PressurePoint>& curve, const std::vector<double>& alphas, Bracket amin,
                              Bracket amax) {
    SpectrumCurve S;
    S.alpha_minus = amin;
    S.alpha_plus = amax;
    const int G = (int)curve.size();
    if (G < 4) throw std::invalid_argument("pressure curve too short");
    std::vector<double> vals, xs;
    for (const auto& c : curve) vals.push_back(c.P.value()), xs.push_back(c.beta);
    boost::math::interpolators::pchip<std::vector<double>> P{std::vector<double>(xs), std::vector<double>(vals)};
    for (double a : alphas) {
        if (!(a > 0) || a < amin.lo || a > amax.hi) {
            ++S.omitted;
            continue;
        }
        int best = 0;
        double bv = std::numeric_limits<double>::infinity();
        for (int i = 0; i < G; ++i) {
            double v = vals[i] + curve[i].beta * a;
            if (v < bv) bv = v, best = i;
        }
        if (best == 0 || best == G - 1) {
            ++S.omitted;
            continue;
        }
        double lo = curve[best - 1].beta, hi = curve[best + 1].beta;
        auto fv = [&](double b) { return P(b) + b * a; };
        const double gr = 0.5 * (std::sqrt(5.0) - 1);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = fv(x1), f2 = fv(x2);
        while (hi - lo > 1e-9) {
            if (f1 < f2) {
                hi = x2, x2 = x1, f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = fv(x1);
            } else {
                lo = x1, x1 = x2, f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = fv(x2);
            }
        }
        SpectrumPoint sp;
        sp.alpha = a;
        sp.beta_star = 0.5 * (lo + hi);
        sp.b = std::min(fv(sp.beta_star), bv) / a;
        S.points.push_back(sp);
    }
    S.b_max = -1;
    for (const auto& p : S.points)
        if (p.b > S.b_max) S.b_max = p.b, S.alpha_G = p.alpha;
    return S;
}

struct RatePoint {
    double alpha{0};
    double I{0};
};

struct RateCurve {
    std::vector<RatePoint> points;
    double left_slope{0}, right_slope{0};
    int convexity_violations{0};
};

inline RateCurve rate(const SpectrumCurve& S) {
    RateCurve R;
    for (const auto& p : S.points) R.points.push_back({p.alpha, p.alpha * (1 - p.b)});
    const auto& P = R.points;
    if (P.size() >= 2) {
        R.left_slope = (P[1].I - P[0].I) / (P[1].alpha - P[0].alpha);
        size_t n = P.size();
        R.right_slope = (P[n - 1].I - P[n - 2].I) / (P[n - 1].alpha - P[n - 2].alpha);
    }
    for (size_t i = 1; i + 1 < P.size(); ++i) {
        double s1 = (P[i].I - P[i - 1].I) / (P[i].alpha - P[i - 1].alpha);
        double s2 = (P[i + 1].I - P[i].I) / (P[i + 1].alpha - P[i].alpha);
        if (s2 < s1 - 1e-6) ++R.convexity_violations;
    }
    return R;
}

// inf of I over an open interval, by linear interpolation on the curve
inline double inf_rate(const RateCurve& R, double a, double b) {
    double best = std::numeric_limits<double>::infinity();
    const auto& P = R.points;
    auto at = [&](double x) {
        for (size_t i = 0; i + 1 < P.size(); ++i)
            if (P[i].alpha <= x && x <= P[i + 1].alpha) {
                double t = (x - P[i].alpha) / (P[i + 1].alpha - P[i].alpha);
                return P[i].I + t * (P[i + 1].I - P[i].I);
            }
        return std::numeric_limits<double>::infinity();
    };
    best = std::min(at(a), at(b));
    for (const auto& p : P)
        if (a < p.alpha && p.alpha < b) best = std::min(best, p.I);
    return best;
}

// ---------------------------------------------------------------- full analysis

struct ThermoSummary {
    DeltaResult delta;
    std::vector<PressurePoint> curve;
    CycleMean alpha_minus_cycle, alpha_plus_cycle;
    Bracket alpha_minus_slope, alpha_plus_slope;
    Bracket alpha_minus, alpha_plus;  // final values
    SpectrumCurve spectrum;
    RateCurve rate;
    std::vector<std::string> warnings;
};

struct AnalysisOptions {
    double beta_min{-3};
    double beta_max{std::numeric_limits<double>::quiet_NaN()};  // default max(2, delta_hi + 0.5)
    int beta_points{101};
    double alpha_lo{std::numeric_limits<double>::quiet_NaN()};  // default: inside (alpha-, alpha+)
    double alpha_hi{std::numeric_limits<double>::quiet_NaN()};
    int alpha_points{81};
    double alpha_margin{0.02};  // fraction of (alpha-, alpha+) left out at each end
    double fine_width{0.3};     // cusped groups: extra samples on [delta_lo - width, delta_hi + 0.05]
    int fine_points{61};
};

namespace detail {
inline Bracket intersect_or_hull(Bracket a, Bracket b) {
    Bracket c{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    if (c.lo <= c.hi) return c;
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}
}  // namespace detail

template <class Real>
ThermoSummary analyse(const ThermoContext<Real>& T, AnalysisOptions ao = {}) {
    ThermoSummary S;
    S.delta = delta_G(T);
    PressureModel<Real> model(T, S.delta.delta);
    double bmax = std::isfinite(ao.beta_max) ? ao.beta_max : std::max(2.0, S.delta.delta.hi + 0.5);
    auto grid = linspace(ao.beta_min, bmax, ao.beta_points);
    if (T.cusped()) {
        // the curve flattens into P = 0 near delta; sample that stretch densely
        auto fine = linspace(S.delta.delta.lo - ao.fine_width, S.delta.delta.hi + 0.05, ao.fine_points);
        grid.insert(grid.end(), fine.begin(), fine.end());
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }), grid.end());
    }
    S.curve = pressure_curve(model, grid);

    S.alpha_minus_cycle = alpha_endpoints_cycle(T, false);
    S.alpha_plus_cycle = alpha_endpoints_cycle(T, true);
    // end slopes -P' of the bracket curves
    auto slope = [&](int i, int j) {
        const auto &a = S.curve[i], &b = S.curve[j];
        double s1 = -(b.P.lo - a.P.lo) / (b.beta - a.beta), s2 = -(b.P.hi - a.P.hi) / (b.beta - a.beta);
        return Bracket{std::min(s1, s2), std::max(s1, s2)};
    };
    int G = (int)S.curve.size();
    S.alpha_plus_slope = slope(0, 1);
    S.alpha_minus_slope = slope(G - 2, G - 1);
    S.alpha_minus = S.alpha_minus_cycle.value;
    S.alpha_plus = S.alpha_plus_cycle.value;
    auto check = [&](const char* what, Bracket c, Bracket sl) {
        double ref = std::max(std::abs(c.mid()), 1e-3);
        if (std::abs(c.mid() - sl.mid()) > 0.1 * ref && std::abs(c.mid() - sl.mid()) > 0.05)
            S.warnings.push_back(std::string(what) + ": cycle-mean and slope estimates differ by more than 10%");
    };
    check("alpha+", S.alpha_plus_cycle.value, S.alpha_plus_slope);
    if (!T.cusped()) check("alpha-", S.alpha_minus_cycle.value, S.alpha_minus_slope);
    S.alpha_plus = detail::intersect_or_hull(S.alpha_plus_cycle.value, S.alpha_plus_slope);

    double a0 = std::max(S.alpha_minus.hi, 0.0), a1 = S.alpha_plus.lo;
    if (T.cusped()) a0 = 0.0;
    double pad = ao.alpha_margin * (a1 - a0);
    auto alphas = linspace(std::isfinite(ao.alpha_lo) ? ao.alpha_lo : a0 + pad,
                           std::isfinite(ao.alpha_hi) ? ao.alpha_hi : a1 - pad, ao.alpha_points);
    S.spectrum = spectrum(S.curve, alphas, S.alpha_minus, S.alpha_plus);
    S.rate = rate(S.spectrum);
    if (S.spectrum.omitted) S.warnings.push_back(std::to_string(S.spectrum.omitted) + " spectrum points omitted (outside [alpha-, alpha+] or inf at the beta grid boundary)");
    return S;
}

}  // namespace bsthermo
