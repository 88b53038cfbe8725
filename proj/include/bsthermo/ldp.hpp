#pragma once

// Monte Carlo large deviations of the Lyapunov proxy (1/n) log|(f^n)'|.

#include <cstdint>

#include "thermo.hpp"

namespace bsthermo {

// Counter-based stream: sample i of a run with a given seed depends only on (seed, i).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline double uniform01(std::uint64_t seed, std::uint64_t i) {
    return double(splitmix64(splitmix64(seed) ^ (i * 0xD1B54A32D192ED03ULL)) >> 11) * 0x1.0p-53;
}

// Uniform point of the domain of f (the circle for first-kind groups)
template <class Real>
Real sample_domain(const BSMap<Real>& F, double u) {
    Real s = u * F.domain_measure();
    for (const auto& b : F.branches) {
        if (s < b.arc.length) return wrap_angle<Real>(b.arc.start + s);
        s -= b.arc.length;
    }
    return F.branches.back().arc.end();
}

struct Histogram {
    double lo{0}, hi{0};
    std::vector<std::size_t> bins;
};

struct LyapunovSample {
    int n{0};
    std::size_t count{0}, censored{0};
    std::vector<double> values;  // surviving samples only
    double mean{0}, sd{0};
    Histogram hist;
};

template <class Real>
LyapunovSample lyapunov_sample(const BSMap<Real>& F, int n, std::size_t count, std::uint64_t seed, int bins = 40) {
    if (n < 1) throw std::invalid_argument("depth must be positive");
    LyapunovSample S;
    S.n = n;
    S.count = count;
    for (std::size_t i = 0; i < count; ++i) {
        auto e = f_expand(F, sample_domain(F, uniform01(seed, i)), n);
        if (e.escape_index >= 0) {
            ++S.censored;
            continue;
        }
        S.values.push_back(double(e.lyapunov_sum) / n);
    }
    if (S.values.empty()) return S;
    double s = 0, s2 = 0;
    for (double v : S.values) s += v, s2 += v * v;
    S.mean = s / S.values.size();
    S.sd = std::sqrt(std::max(0.0, s2 / S.values.size() - S.mean * S.mean));
    auto [mn, mx] = std::minmax_element(S.values.begin(), S.values.end());
    S.hist.lo = *mn;
    S.hist.hi = *mx > *mn ? *mx : *mn + 1e-12;
    S.hist.bins.assign(bins, 0);
    for (double v : S.values) {
        int k = int((v - S.hist.lo) / (S.hist.hi - S.hist.lo) * bins);
        ++S.hist.bins[std::clamp(k, 0, bins - 1)];
    }
    return S;
}

struct DepthRow {
    int n{0};
    std::size_t hits{0};
    double fraction{0};
    double lograte{0};  // log(fraction) / n
    bool used{false};   // enough hits for the fit
};

struct DeviationExperiment {
    Bracket J;
    std::size_t samples{0};
    std::uint64_t seed{0};
    std::vector<DepthRow> rows;
    double fitted_rate{std::numeric_limits<double>::quiet_NaN()};  // slope of log fraction vs n
    double fit_stderr{std::numeric_limits<double>::quiet_NaN()};
    double reference{std::numeric_limits<double>::quiet_NaN()};    // -inf_J I
    int used_depths{0};
};

class LdpError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Fraction of the domain whose first n iterates stay in the domain and whose Lyapunov
// average lies in J, for each n in depths. All depths share the same samples.
template <class Real>
DeviationExperiment deviation_rate(const BSMap<Real>& F, Bracket J, std::vector<int> depths, std::size_t count,
                                   std::uint64_t seed, Bracket alpha_range, double min_hits = 10) {
    if (depths.empty()) throw LdpError("no depths given");
    if (!(J.lo < J.hi)) throw LdpError("empty interval J");
    if (J.hi <= alpha_range.lo || J.lo >= alpha_range.hi)
        throw LdpError("interval J does not meet (alpha-, alpha+)");
    std::sort(depths.begin(), depths.end());
    DeviationExperiment E;
    E.J = J;
    E.samples = count;
    E.seed = seed;
    const int nmax = depths.back();
    std::vector<std::size_t> hits(depths.size(), 0);
    const auto& G = F.G();
    for (std::size_t i = 0; i < count; ++i) {
        Real t = sample_domain(F, uniform01(seed, i));
        Real sum = 0;
        std::size_t di = 0;
        for (int k = 1; k <= nmax; ++k) {
            int a = F.branch_of(t);
            if (a < 0) break;  // censored from here on
            const auto& g = G.gen_bar[a];
            sum += g.log_boundary_derivative(t);
            t = g.act(t);
            while (di < depths.size() && depths[di] < k) ++di;
            if (di < depths.size() && depths[di] == k) {
                double avg = double(sum) / k;
                if (J.lo < avg && avg < J.hi) ++hits[di];
            }
        }
    }
    std::vector<double> xs, ys;
    for (std::size_t d = 0; d < depths.size(); ++d) {
        DepthRow r;
        r.n = depths[d];
        r.hits = hits[d];
        r.fraction = double(hits[d]) / count;
        r.lograte = hits[d] ? std::log(r.fraction) / r.n : -std::numeric_limits<double>::infinity();
        r.used = hits[d] >= min_hits;
        if (r.used) xs.push_back(r.n), ys.push_back(std::log(r.fraction));
        E.rows.push_back(r);
    }
    E.used_depths = (int)xs.size();
    if (xs.size() >= 2) {
        double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) sxx += (xs[i] - mx) * (xs[i] - mx), sxy += (xs[i] - mx) * (ys[i] - my);
        E.fitted_rate = sxy / sxx;
        double rss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double e = ys[i] - (my + E.fitted_rate * (xs[i] - mx));
            rss += e * e;
        }
        E.fit_stderr = xs.size() > 2 ? std::sqrt(rss / (xs.size() - 2) / sxx) : 0.0;
    }
    return E;
}

struct CodingCrosscheck {
    int n{0};
    std::size_t used{0}, skipped{0};
    double max_abs_diff{0};   // max |t_n - log|(f^n)'||
    double mean_abs_diff{0};
};

// Geodesic coding versus boundary iteration on matched samples: t_n is the distance
// from the origin of the product of the first n cutting letters.
template <class Real>
CodingCrosscheck coding_crosscheck(const BSMap<Real>& F, std::size_t count, int n, std::uint64_t seed) {
    CodingCrosscheck R;
    R.n = n;
    const auto& G = F.G();
    double total = 0;
    for (std::size_t i = 0; i < count; ++i) {
        Real eta = sample_domain(F, uniform01(seed, 2 * i));
        auto e = f_expand(F, eta, n);
        if (e.escape_index >= 0) {
            ++R.skipped;
            continue;
        }
        MoebiusTransform<Real> g;
        for (int a : e.word) g = compose(g, G.gen[a]);
        double d = std::abs(double(e.lyapunov_sum) - double(g.dist_origin()));
        R.max_abs_diff = std::max(R.max_abs_diff, d);
        total += d;
        ++R.used;
    }
    if (R.used) R.mean_abs_diff = total / R.used;
    return R;
}

}  // namespace bsthermo
