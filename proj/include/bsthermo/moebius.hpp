#pragma once

// Disk-preserving Moebius maps z -> (a z + b) / (conj(b) z + conj(a)), |a|^2 - |b|^2 = 1,
// together with boundary points, arcs and geodesics of the Poincare disk.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

namespace bsthermo {

using Mp50 = boost::multiprecision::cpp_bin_float_50;

template <class Real>
struct complex_of {
    using type = std::complex<Real>;
};
template <>
struct complex_of<Mp50> {
    using type = boost::multiprecision::cpp_complex_50;
};
template <class Real>
using complex_t = typename complex_of<Real>::type;

template <class Real>
inline Real pi_v() { return boost::math::constants::pi<Real>(); }
template <class Real>
inline Real two_pi_v() { return boost::math::constants::two_pi<Real>(); }

// Tolerance scaled to the working precision.
template <class Real>
inline Real eps_v() {
    if constexpr (std::is_same_v<Real, double>) return Real(1e-12);
    else return Real(1e-40);
}

template <class Real>
inline Real wrap_angle(Real t) {
    using std::floor;
    const Real tp = two_pi_v<Real>();
    t = t - tp * floor(t / tp);
    if (t >= tp) t -= tp;
    if (t < 0) t = 0;
    return t;
}

// anticlockwise angular distance from s to t, in [0, 2pi)
template <class Real>
inline Real ccw_dist(Real s, Real t) { return wrap_angle<Real>(t - s); }

template <class Real>
inline complex_t<Real> on_circle(Real t) {
    using std::cos;
    using std::sin;
    return complex_t<Real>(cos(t), sin(t));
}

template <class Real>
inline Real angle_of(const complex_t<Real>& z) {
    using std::arg;
    return wrap_angle<Real>(Real(arg(z)));
}

// |e^{is} - e^{it}| computed from the angles, stable for nearby points
template <class Real>
inline Real chord(Real s, Real t) {
    using std::abs;
    using std::sin;
    return 2 * abs(sin((t - s) / 2));
}

template <class Real>
struct BoundaryPoint {
    Real angle{0};
    BoundaryPoint() = default;
    explicit BoundaryPoint(Real t) : angle(wrap_angle<Real>(t)) {}
    complex_t<Real> z() const { return on_circle<Real>(angle); }
};

// Left-closed, right-open arc [start, start + length) traversed anticlockwise.
template <class Real>
struct Arc {
    Real start{0};
    Real length{0};

    Arc() = default;
    Arc(Real s, Real len) : start(wrap_angle<Real>(s)), length(len) {}
    static Arc between(Real s, Real e) {
        Real len = ccw_dist<Real>(s, e);
        if (len == 0) len = two_pi_v<Real>();
        return Arc(s, len);
    }
    Real end() const { return wrap_angle<Real>(start + length); }
    bool contains(Real t) const { return ccw_dist<Real>(start, t) < length; }
    // normalized Lebesgue measure
    Real measure() const { return length / two_pi_v<Real>(); }
};

// Intersection of two arcs. Empty or a single arc; two components throw.
template <class Real>
inline std::optional<Arc<Real>> intersect(const Arc<Real>& x, const Arc<Real>& y, Real tol) {
    const Real tp = two_pi_v<Real>();
    if (x.length >= tp - tol) return y;
    if (y.length >= tp - tol) return x;
    // express y relative to x.start
    Real ys = ccw_dist<Real>(x.start, y.start);
    Real ye = ys + y.length;
    std::vector<std::pair<Real, Real>> parts;
    auto clip = [&](Real s, Real e) {
        Real a = std::max(s, Real(0));
        Real b = std::min(e, x.length);
        if (b - a > tol) parts.emplace_back(a, b);
    };
    clip(ys, ye);
    clip(ys - tp, ye - tp);
    if (parts.empty()) return std::nullopt;
    if (parts.size() > 1) throw std::runtime_error("arc intersection has two components");
    return Arc<Real>(x.start + parts[0].first, parts[0].second - parts[0].first);
}

template <class Real>
struct MoebiusTransform {
    using C = complex_t<Real>;
    C a{Real(1), Real(0)};
    C b{Real(0), Real(0)};

    MoebiusTransform() = default;
    MoebiusTransform(C a_, C b_) : a(a_), b(b_) {}

    static MoebiusTransform identity() { return {}; }
    static MoebiusTransform rotation(Real theta) {
        return {on_circle<Real>(theta / 2), C(0)};
    }
    // hyperbolic translation along the real diameter by distance t
    static MoebiusTransform axial(Real t) {
        using std::cosh;
        using std::sinh;
        return {C(cosh(t / 2)), C(sinh(t / 2))};
    }
    // the transvection taking 0 to c along the diameter through c
    static MoebiusTransform to_point(const C& c) {
        using std::norm;
        using std::sqrt;
        Real s = sqrt(Real(1) - Real(norm(c)));
        return {C(Real(1) / s), c / s};
    }

    Real det() const {
        using std::norm;
        return Real(norm(a)) - Real(norm(b));
    }
    void renormalize() {
        using std::sqrt;
        Real s = sqrt(det());
        a /= s;
        b /= s;
    }
    MoebiusTransform inverse() const {
        using std::conj;
        return {conj(a), -b};
    }

    C operator()(const C& z) const {
        using std::conj;
        return (a * z + b) / (conj(b) * z + conj(a));
    }
    // boundary action on an angle
    Real act(Real t) const { return angle_of<Real>((*this)(on_circle<Real>(t))); }

    // |g'(xi)| for xi on the unit circle
    Real boundary_derivative(Real t) const {
        using std::conj;
        using std::norm;
        C w = conj(b) * on_circle<Real>(t) + conj(a);
        return Real(1) / Real(norm(w));
    }
    Real log_boundary_derivative(Real t) const {
        using std::log;
        return log(boundary_derivative(t));
    }

    // d(0, g(0)) for the curvature -1 metric
    Real dist_origin() const {
        using std::abs;
        using std::log;
        using std::log1p;
        Real aa = abs(a), bb = abs(b);
        if (aa > Real(1e150)) return 2 * (log(aa) + log1p(bb / aa));
        return 2 * log(aa + bb);
    }

    // two transforms are equal as maps iff their (a, b) agree up to a global sign
    Real distance_to(const MoebiusTransform& h) const {
        using std::abs;
        Real d1 = abs(a - h.a) + abs(b - h.b);
        Real d2 = abs(a + h.a) + abs(b + h.b);
        return std::min(d1, d2);
    }
};

template <class Real>
inline MoebiusTransform<Real> compose(const MoebiusTransform<Real>& g, const MoebiusTransform<Real>& h) {
    using std::conj;
    MoebiusTransform<Real> r(g.a * h.a + g.b * conj(h.b), g.a * h.b + g.b * conj(h.a));
    r.renormalize();
    return r;
}

template <class Real>
inline MoebiusTransform<Real> operator*(const MoebiusTransform<Real>& g, const MoebiusTransform<Real>& h) {
    return compose(g, h);
}

template <class Real>
inline Real dist_origin(const MoebiusTransform<Real>& g) { return g.dist_origin(); }

template <class Real>
inline Real boundary_derivative(const MoebiusTransform<Real>& g, const BoundaryPoint<Real>& xi) {
    return g.boundary_derivative(xi.angle);
}

// Image of an arc: orientation is preserved so the endpoints go to endpoints.
// The length uses |g(s) - g(e)| = |s - e| sqrt(|g'(s)| |g'(e)|), which stays accurate
// for short image arcs.
template <class Real>
inline Arc<Real> image(const MoebiusTransform<Real>& g, const Arc<Real>& A) {
    using std::asin;
    using std::sqrt;
    const Real tp = two_pi_v<Real>();
    if (A.length >= tp) return Arc<Real>(g.act(A.start), tp);
    Real s = A.start, e = A.start + A.length;
    Real gs = g.act(s);
    Real c = chord<Real>(s, e) * sqrt(g.boundary_derivative(s) * g.boundary_derivative(e));
    if (c > 2) c = 2;
    Real half = asin(c / 2);
    // the image is either the short or the long arc with that chord
    Real ge = g.act(e);
    Real approx = ccw_dist<Real>(gs, ge);
    Real len = (approx <= pi_v<Real>()) ? 2 * half : tp - 2 * half;
    return Arc<Real>(gs, len);
}

// Exact range of |g'| over an arc. |g'(xi)| = 1 / (|b|^2 |xi - p|^2) with p = -conj(a)/conj(b)
// outside the disk, so the extremes sit at the endpoints or at +-p/|p|.
template <class Real>
inline std::pair<Real, Real> derivative_range(const MoebiusTransform<Real>& g, const Arc<Real>& A) {
    using std::abs;
    using std::conj;
    Real d0 = g.boundary_derivative(A.start);
    Real d1 = g.boundary_derivative(A.start + A.length);
    Real lo = std::min(d0, d1), hi = std::max(d0, d1);
    if (abs(g.b) > Real(0)) {
        auto p = -conj(g.a) / conj(g.b);
        Real tmax = angle_of<Real>(p);
        Real tmin = wrap_angle<Real>(tmax + pi_v<Real>());
        if (A.contains(tmax)) hi = g.boundary_derivative(tmax);
        if (A.contains(tmin)) lo = g.boundary_derivative(tmin);
    }
    return {lo, hi};
}

enum class MoebiusKind { identity, elliptic, parabolic, hyperbolic };

inline const char* to_string(MoebiusKind k) {
    switch (k) {
        case MoebiusKind::identity: return "identity";
        case MoebiusKind::elliptic: return "elliptic";
        case MoebiusKind::parabolic: return "parabolic";
        case MoebiusKind::hyperbolic: return "hyperbolic";
    }
    return "?";
}

template <class Real>
struct Classification {
    MoebiusKind kind{MoebiusKind::identity};
    bool near_parabolic{false};
    std::vector<complex_t<Real>> fixed_points;  // boundary fixed points, or the interior one
};

// Fixed points solve conj(b) z^2 + (conj(a) - a) z - b = 0, giving
// z = (i Im a +- sqrt(Re(a)^2 - 1)) / conj(b).
template <class Real>
inline Classification<Real> classify(const MoebiusTransform<Real>& g, double tol = 1e-9) {
    using std::abs;
    using std::conj;
    using std::imag;
    using std::real;
    using std::sqrt;
    using C = complex_t<Real>;
    Classification<Real> out;
    Real ra = abs(Real(real(g.a)));
    Real dev = ra - 1;
    if (abs(g.b) < Real(tol) && abs(Real(imag(g.a))) < Real(tol)) {
        out.kind = MoebiusKind::identity;
        return out;
    }
    const C I(Real(0), Real(1));
    Real ia = imag(g.a);
    if (abs(dev) <= Real(tol)) {
        out.kind = MoebiusKind::parabolic;
        out.near_parabolic = abs(dev) > Real(1e-12);
        out.fixed_points.push_back(I * ia / conj(g.b));
        return out;
    }
    if (dev > 0) {
        out.kind = MoebiusKind::hyperbolic;
        Real s = sqrt(Real(real(g.a)) * Real(real(g.a)) - 1);
        out.fixed_points.push_back((I * ia + s) / conj(g.b));
        out.fixed_points.push_back((I * ia - s) / conj(g.b));
        return out;
    }
    out.kind = MoebiusKind::elliptic;
    Real s = sqrt(1 - Real(real(g.a)) * Real(real(g.a)));
    C z1 = (I * ia + I * s) / conj(g.b);
    C z2 = (I * ia - I * s) / conj(g.b);
    out.fixed_points.push_back(abs(z1) < 1 ? z1 : z2);
    return out;
}

// Oriented geodesic from neg to pos (both boundary angles).
template <class Real>
struct Geodesic {
    Real neg{0};
    Real pos{0};
    bool diameter{false};
    complex_t<Real> center{};
    Real radius{0};

    Geodesic() = default;
    Geodesic(Real n, Real p) : neg(wrap_angle<Real>(n)), pos(wrap_angle<Real>(p)) {
        using std::abs;
        using std::cos;
        using std::tan;
        Real half = ccw_dist<Real>(neg, pos) / 2;
        Real mid = neg + half;
        // circle orthogonal to the unit circle: centre at distance sec(half), radius |tan(half)|
        if (abs(cos(half)) < Real(1e-14)) {
            diameter = true;
        } else {
            Real D = 1 / cos(half);
            center = on_circle<Real>(mid) * D;
            radius = abs(tan(half));
        }
    }
    Geodesic reversed() const { return Geodesic(pos, neg); }
    // |center|^2 - radius^2 - 1, zero for a circle orthogonal to the unit circle
    Real orthogonality_defect() const {
        using std::norm;
        if (diameter) return 0;
        return Real(norm(center)) - radius * radius - 1;
    }
};

template <class Real>
inline Geodesic<Real> image(const MoebiusTransform<Real>& g, const Geodesic<Real>& G) {
    return Geodesic<Real>(g.act(G.neg), g.act(G.pos));
}

// Intersection of two geodesics given by endpoint angles, via the Klein model where
// geodesics are chords. Returns nullopt if they do not cross inside the disk.
template <class Real>
inline std::optional<complex_t<Real>> geodesic_intersection(Real p1, Real q1, Real p2, Real q2) {
    using std::abs;
    using std::imag;
    using std::real;
    using std::sqrt;
    using C = complex_t<Real>;
    // endpoints interleave iff exactly one of p2, q2 lies strictly inside the arc (p1, q1)
    Real l = ccw_dist<Real>(p1, q1);
    Real a = ccw_dist<Real>(p1, p2), b = ccw_dist<Real>(p1, q2);
    const Real tol = eps_v<Real>();
    auto inside = [&](Real x) { return x > tol && x < l - tol; };
    auto outside = [&](Real x) { return x > l + tol && x < two_pi_v<Real>() - tol; };
    if (!((inside(a) && outside(b)) || (inside(b) && outside(a)))) return std::nullopt;
    C A = on_circle<Real>(p1), B = on_circle<Real>(q1), Cc = on_circle<Real>(p2), D = on_circle<Real>(q2);
    C r = B - A, s = D - Cc;
    Real den = Real(real(r)) * Real(imag(s)) - Real(imag(r)) * Real(real(s));
    C w = Cc - A;
    Real t = (Real(real(w)) * Real(imag(s)) - Real(imag(w)) * Real(real(s))) / den;
    C k = A + r * t;
    Real kk = abs(k);
    return k / (1 + sqrt(1 - kk * kk));
}

}  // namespace bsthermo
