#pragma once

// Fundamental polygons, side pairings, vertex cycles and the admissible-word engine.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moebius.hpp"

namespace bsthermo {

using Word = std::vector<int>;  // letters e_i as 0-based side indices

class GroupError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- spec

struct SideEntry {
    bool free{false};
    std::string a;  // P (or free start)
    std::string b;  // Q (or free end)
};

struct GroupSpec {
    std::string name;
    std::string kind_hint;
    std::vector<SideEntry> sides;
    std::vector<std::pair<int, int>> pairing;  // 1-based indices into sides
};

inline std::string angle_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    throw GroupError("angle must be a decimal string or number");
}

inline GroupSpec parse_group_spec(const nlohmann::json& j) {
    GroupSpec s;
    s.name = j.value("name", "unnamed");
    s.kind_hint = j.value("kind_hint", "");
    if (!j.contains("sides") || !j["sides"].is_array()) throw GroupError("spec: missing sides array");
    for (const auto& e : j["sides"]) {
        SideEntry se;
        if (e.contains("free")) {
            if (!e["free"].is_array() || e["free"].size() != 2) throw GroupError("spec: free side needs two angles");
            se.free = true;
            se.a = angle_string(e["free"][0]);
            se.b = angle_string(e["free"][1]);
        } else {
            if (!e.contains("p") || !e.contains("q")) throw GroupError("spec: side needs p and q");
            se.a = angle_string(e["p"]);
            se.b = angle_string(e["q"]);
        }
        s.sides.push_back(se);
    }
    if (!j.contains("pairing") || !j["pairing"].is_array()) throw GroupError("spec: missing pairing array");
    for (const auto& p : j["pairing"]) {
        if (!p.is_array() || p.size() != 2) throw GroupError("spec: pairing entries are [i, j]");
        s.pairing.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
    return s;
}

inline nlohmann::json to_json(const GroupSpec& s) {
    nlohmann::json j;
    j["name"] = s.name;
    j["kind_hint"] = s.kind_hint;
    j["sides"] = nlohmann::json::array();
    for (const auto& e : s.sides) {
        if (e.free) j["sides"].push_back({{"free", {e.a, e.b}}});
        else j["sides"].push_back({{"p", e.a}, {"q", e.b}});
    }
    j["pairing"] = nlohmann::json::array();
    for (auto [a, b] : s.pairing) j["pairing"].push_back({a, b});
    return j;
}

// FNV-1a over the canonical JSON dump; used to tag output files.
inline std::string spec_hash(const GroupSpec& s) {
    std::string d = to_json(s).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : d) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

namespace detail {
inline const char* octagon_json = R"({
 "name": "octagon-genus2", "kind_hint": "first",
 "sides": [
  {"p": "5.856106720787110351444639883240048909091", "q": "0.4270785863924761254806468833189568593033"},
  {"p": "0.358319577004972184135013962500918861746", "q": "1.212476749789924435096307729138832580353"},
  {"p": "1.143717740402420493750674808320794582795", "q": "1.997874913187372744711968574958708301402"},
  {"p": "1.929115903799868803366335654140670303845", "q": "2.783273076584821054327629420778584022451"},
  {"p": "2.714514067197317112981996499960546024894", "q": "3.568671239982269363943290266598459743501"},
  {"p": "3.499912230594765422597657345780421745943", "q": "4.35406940337971767355895111241833546455"},
  {"p": "4.285310393992213732213318191600297466992", "q": "5.139467566777165983174611958238211185599"},
  {"p": "5.070708557389662041828979037420173188042", "q": "5.924865730174614292790272804058086906648"}
 ],
 "pairing": [[1,5],[2,6],[3,7],[4,8]]
})";

inline const char* torus_json = R"({
 "name": "punctured-torus-ideal-square", "kind_hint": "first",
 "sides": [
  {"p": "5.497787143782138167309625920739130047345", "q": "0.7853981633974483096156608458198757210493"},
  {"p": "0.7853981633974483096156608458198757210493", "q": "2.356194490192344928846982537459627163148"},
  {"p": "2.356194490192344928846982537459627163148", "q": "3.926990816987241548078304229099378605246"},
  {"p": "3.926990816987241548078304229099378605246", "q": "5.497787143782138167309625920739130047345"}
 ],
 "pairing": [[1,3],[2,4]]
})";

inline const char* schottky_json = R"({
 "name": "schottky-rank2", "kind_hint": "second",
 "sides": [
  {"p": "5.543185307179586476925286766559005768394", "q": "0.74"},
  {"free": ["0.74", "0.8307963267948966192313216916397514420986"]},
  {"p": "0.8307963267948966192313216916397514420986", "q": "2.310796326794896619231321691639751442099"},
  {"free": ["2.310796326794896619231321691639751442099", "2.401592653589793238462643383279502884197"]},
  {"p": "2.401592653589793238462643383279502884197", "q": "3.881592653589793238462643383279502884197"},
  {"free": ["3.881592653589793238462643383279502884197", "3.972388980384689857693965074919254326296"]},
  {"p": "3.972388980384689857693965074919254326296", "q": "5.452388980384689857693965074919254326296"},
  {"free": ["5.452388980384689857693965074919254326296", "5.543185307179586476925286766559005768394"]}
 ],
 "pairing": [[1,5],[3,7]]
})";
}  // namespace detail

inline std::vector<std::string> builtin_names() {
    return {"octagon-genus2", "schottky-rank2", "punctured-torus-ideal-square"};
}

inline GroupSpec builtin_spec(const std::string& name) {
    if (name == "octagon-genus2") return parse_group_spec(nlohmann::json::parse(detail::octagon_json));
    if (name == "schottky-rank2") return parse_group_spec(nlohmann::json::parse(detail::schottky_json));
    if (name == "punctured-torus-ideal-square") return parse_group_spec(nlohmann::json::parse(detail::torus_json));
    throw GroupError("unknown builtin group: " + name);
}

template <class Real>
inline Real parse_real(const std::string& s) {
    if constexpr (std::is_same_v<Real, double>) return std::stod(s);
    else return Real(s);
}

// ---------------------------------------------------------------- presentation

enum class JointKind { interior, cusp, gap };

template <class Real>
struct Joint {
    // relation between side i-1 and side i; v_i in the usual numbering
    JointKind kind{JointKind::interior};
    complex_t<Real> z{};   // interior vertex position
    Real angle{0};         // cusp position on the circle
    Real gap_start{0};     // Q_i for a free side [Q_i, P_i]
    Real gap_end{0};       // P_i
    Real corner{0};        // interior angle of R at an interior vertex
};

template <class Real>
struct VertexCycle {
    std::vector<int> joints;    // joint indices visited by the clockwise walk
    Word cw;                    // cutting word of a small clockwise circle
    Word acw;                   // same for an anticlockwise circle
    bool cusp{false};
    int n{0};                   // n(v); 0 for cusps (infinite)
    Real angle_sum{0};
    MoebiusTransform<Real> product;  // cw word evaluated
};

enum class Orientation { ccw, cw };

template <class Real>
struct GroupPresentation {
    using M = MoebiusTransform<Real>;
    std::string name;
    int m{0};
    std::vector<Real> P, Q;  // P[i] = P_i, Q[i] = Q_{i+1}: endpoints of side i's geodesic
    std::vector<int> sigma;  // e_i^{-1} = e_{sigma(i)}
    std::vector<M> gen;      // e_i: R -> the copy across side i
    std::vector<M> gen_bar;  // e_i^{-1}
    std::vector<Joint<Real>> joints;
    std::vector<VertexCycle<Real>> cycles;
    std::vector<int> joint_cycle;  // cycle index per joint, -1 for gaps
    bool first_kind{true};
    int rotation_step{0};          // smallest r with rotation by 2 pi r / m a symmetry; 0 if none

    int inv(int x) const { return sigma[x]; }
    M eval(const Word& w) const {
        M g;
        for (int x : w) g = compose(g, gen[x]);
        return g;
    }
    int num_cusps() const {
        int c = 0;
        for (const auto& j : joints) c += j.kind == JointKind::cusp;
        return c;
    }
    bool has_cusps() const { return num_cusps() > 0; }
    Geodesic<Real> side_geodesic(int i) const { return Geodesic<Real>(P[i], Q[i]); }
};

template <class Real>
struct EvenCornerReport {
    bool pass{true};
    std::vector<std::string> violations;
};

namespace detail {

// Transform taking the imaginary diameter to the geodesic (p, q) with -i -> p, i -> q and 0 -> anchor.
template <class Real>
MoebiusTransform<Real> frame(Real p, Real q, const complex_t<Real>& anchor) {
    using C = complex_t<Real>;
    auto T = MoebiusTransform<Real>::to_point(anchor);
    C u = T.inverse()(on_circle<Real>(q));
    // rotation taking i to u
    Real rot = angle_of<Real>(u) - pi_v<Real>() / 2;
    (void)p;
    return compose(T, MoebiusTransform<Real>::rotation(rot));
}

template <class Real>
complex_t<Real> hyperbolic_midpoint(const complex_t<Real>& z1, const complex_t<Real>& z2) {
    using std::abs;
    using std::atanh;
    using std::tanh;
    auto T = MoebiusTransform<Real>::to_point(z1);
    auto w = T.inverse()(z2);
    Real r = abs(w);
    if (r == 0) return z1;
    Real rm = tanh(atanh(r) / 2);
    return T(w / r * rm);
}

// unit tangent at z of the geodesic through z heading toward the boundary point e
template <class Real>
complex_t<Real> tangent_toward(const Geodesic<Real>& g, const complex_t<Real>& z, Real e) {
    using std::abs;
    using std::imag;
    using std::real;
    using C = complex_t<Real>;
    C E = on_circle<Real>(e);
    C t;
    if (g.diameter) {
        t = E - z;
    } else {
        C r = z - g.center;
        t = C(-Real(imag(r)), Real(real(r)));
        C d = E - z;
        if (Real(real(t)) * Real(real(d)) + Real(imag(t)) * Real(imag(d)) < 0) t = -t;
    }
    return t / abs(t);
}

}  // namespace detail

template <class Real>
GroupPresentation<Real> build_group(const GroupSpec& spec, double match_tol = 1e-9) {
    using C = complex_t<Real>;
    using M = MoebiusTransform<Real>;
    using std::abs;
    using std::acos;
    using std::cos;
    using std::imag;
    using std::real;
    using std::sin;
    GroupPresentation<Real> G;
    G.name = spec.name;
    const Real tol = Real(match_tol);
    const Real tp = two_pi_v<Real>();

    std::vector<int> geo_of_entry(spec.sides.size(), -1);
    for (size_t k = 0; k < spec.sides.size(); ++k) {
        const auto& e = spec.sides[k];
        if (e.free) continue;
        geo_of_entry[k] = G.m++;
        G.P.push_back(wrap_angle<Real>(parse_real<Real>(e.a)));
        G.Q.push_back(wrap_angle<Real>(parse_real<Real>(e.b)));
    }
    const int m = G.m;
    if (m < 4) throw GroupError("need at least four paired sides, got " + std::to_string(m));

    // 0 must lie inside: each exterior arc [P_i, Q_{i+1}] shorter than a half circle
    for (int i = 0; i < m; ++i) {
        Real len = ccw_dist<Real>(G.P[i], G.Q[i]);
        if (!(len < pi_v<Real>() - tol))
            throw GroupError("side " + std::to_string(i + 1) + " does not separate 0 from its exterior");
    }
    // anticlockwise order of the P_i
    {
        Real total = 0;
        for (int i = 0; i < m; ++i) total += ccw_dist<Real>(G.P[i], G.P[(i + 1) % m]);
        if (abs(total - tp) > Real(1e-6)) throw GroupError("sides are not listed in anticlockwise order");
    }
    // non-adjacent exterior arcs must be disjoint
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i == j || (i + 1) % m == j || (j + 1) % m == i) continue;
            Real s = ccw_dist<Real>(G.P[i], G.P[j]);
            if (s < ccw_dist<Real>(G.P[i], G.Q[i]) - tol)
                throw GroupError("sides " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " overlap");
        }

    // pairing
    G.sigma.assign(m, -1);
    for (auto [a, b] : spec.pairing) {
        if (a < 1 || b < 1 || a > (int)spec.sides.size() || b > (int)spec.sides.size())
            throw GroupError("pairing index out of range");
        int ia = geo_of_entry[a - 1], ib = geo_of_entry[b - 1];
        if (ia < 0 || ib < 0) throw GroupError("pairing refers to a free side");
        if (ia == ib) throw GroupError("self-paired side " + std::to_string(a) + " gives an elliptic involution");
        if (G.sigma[ia] != -1 || G.sigma[ib] != -1) throw GroupError("side paired twice");
        G.sigma[ia] = ib;
        G.sigma[ib] = ia;
    }
    for (int i = 0; i < m; ++i)
        if (G.sigma[i] < 0) throw GroupError("side " + std::to_string(i + 1) + " is unpaired");

    // joints between consecutive sides
    G.joints.resize(m);
    G.first_kind = true;
    for (int i = 0; i < m; ++i) {
        int h = (i + m - 1) % m;  // previous side
        auto& J = G.joints[i];
        Real d = ccw_dist<Real>(G.P[i], G.Q[h]);  // > 0 small if they cross, ~2pi if gap
        if (d < tol || d > tp - tol) {
            J.kind = JointKind::cusp;
            J.angle = G.P[i];
        } else if (d < pi_v<Real>()) {
            auto z = geodesic_intersection<Real>(G.P[h], G.Q[h], G.P[i], G.Q[i]);
            if (!z) throw GroupError("adjacent sides " + std::to_string(h + 1) + "," + std::to_string(i + 1) + " fail to meet");
            J.kind = JointKind::interior;
            J.z = *z;
        } else {
            J.kind = JointKind::gap;
            J.gap_start = G.Q[h];
            J.gap_end = G.P[i];
            G.first_kind = false;
        }
    }

    // declared free sides must match the gaps, in order
    {
        std::vector<std::pair<Real, Real>> declared;
        for (const auto& e : spec.sides)
            if (e.free) declared.emplace_back(wrap_angle<Real>(parse_real<Real>(e.a)), wrap_angle<Real>(parse_real<Real>(e.b)));
        std::vector<std::pair<Real, Real>> gaps;
        for (const auto& J : G.joints)
            if (J.kind == JointKind::gap) gaps.emplace_back(J.gap_start, J.gap_end);
        if (declared.size() != gaps.size())
            throw GroupError("free sides declared: " + std::to_string(declared.size()) + ", gaps found: " + std::to_string(gaps.size()));
        for (const auto& d : declared) {
            bool ok = false;
            for (const auto& g : gaps)
                ok = ok || (chord<Real>(d.first, g.first) < tol && chord<Real>(d.second, g.second) < tol);
            if (!ok) throw GroupError("declared free side does not match a gap between geodesic sides");
        }
    }

    // side segment endpoints: start at joint i, end at joint i+1
    auto seg_start_finite = [&](int i) { return G.joints[i].kind == JointKind::interior; };
    auto seg_end_finite = [&](int i) { return G.joints[(i + 1) % m].kind == JointKind::interior; };
    auto anchor = [&](int i) -> C {
        bool s = seg_start_finite(i), e = seg_end_finite(i);
        if (s && e) return detail::hyperbolic_midpoint<Real>(G.joints[i].z, G.joints[(i + 1) % m].z);
        if (s) return G.joints[i].z;
        if (e) return G.joints[(i + 1) % m].z;
        // foot of the perpendicular from 0
        Real len = ccw_dist<Real>(G.P[i], G.Q[i]);
        Real r = (1 - sin(len / 2)) / cos(len / 2);
        return on_circle<Real>(G.P[i] + len / 2) * r;
    };

    // pairing transforms: e_i^{-1} = K_j H K_i^{-1}, H(z) = -z
    M H(C(Real(0), Real(1)), C(Real(0)));
    std::vector<M> K(m);
    for (int i = 0; i < m; ++i) K[i] = detail::frame<Real>(G.P[i], G.Q[i], anchor(i));
    G.gen.resize(m);
    G.gen_bar.resize(m);
    for (int i = 0; i < m; ++i) {
        int j = G.sigma[i];
        if (seg_start_finite(i) != seg_end_finite(j) || seg_end_finite(i) != seg_start_finite(j))
            throw GroupError("pairing mismatch between sides " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                             ": vertex types differ");
        if (j < i) continue;
        G.gen_bar[i] = compose(compose(K[j], H), K[i].inverse());
        G.gen_bar[j] = G.gen_bar[i].inverse();
    }
    for (int i = 0; i < m; ++i) G.gen[i] = G.gen_bar[i].inverse();
    for (int i = 0; i < m; ++i) {
        int j = G.sigma[i];
        const M& eb = G.gen_bar[i];
        auto bad = [&](const std::string& what) {
            throw GroupError("pairing mismatch between sides " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + ": " + what);
        };
        if (chord<Real>(eb.act(G.P[i]), G.Q[j]) > tol || chord<Real>(eb.act(G.Q[i]), G.P[j]) > tol) bad("geodesic endpoints");
        if (seg_start_finite(i) && abs(eb(G.joints[i].z) - G.joints[(j + 1) % m].z) > tol) bad("segment lengths differ");
        if (seg_end_finite(i) && abs(eb(G.joints[(i + 1) % m].z) - G.joints[j].z) > tol) bad("segment lengths differ");
        // the kind of ideal end must agree too
        auto kind_of = [&](int joint) { return G.joints[joint].kind; };
        if (kind_of(i) != kind_of((j + 1) % m) || kind_of((i + 1) % m) != kind_of(j)) bad("vertex kinds differ");
        if (G.gen[j].distance_to(G.gen_bar[i]) > tol) bad("pairing transforms are not mutually inverse");
        auto cl = classify(G.gen[i]);
        if (cl.kind == MoebiusKind::elliptic && cl.fixed_points.size() && abs(cl.fixed_points[0]) < Real(1e-9))
            bad("elliptic pairing fixing 0");
    }

    // corner angles
    for (int i = 0; i < m; ++i) {
        auto& J = G.joints[i];
        if (J.kind != JointKind::interior) continue;
        int h = (i + m - 1) % m;
        auto t1 = detail::tangent_toward<Real>(G.side_geodesic(i), J.z, G.Q[i]);
        auto t0 = detail::tangent_toward<Real>(G.side_geodesic(h), J.z, G.P[h]);
        Real dot = Real(real(t1)) * Real(real(t0)) + Real(imag(t1)) * Real(imag(t0));
        if (dot > 1) dot = 1;
        if (dot < -1) dot = -1;
        J.corner = acos(dot);
    }

    // vertex cycles: clockwise walk j -> sigma(j)+1 with letter j,
    // anticlockwise walk j -> sigma(j-1) with letter j-1
    G.joint_cycle.assign(m, -1);
    for (int start = 0; start < m; ++start) {
        if (G.joints[start].kind == JointKind::gap || G.joint_cycle[start] >= 0) continue;
        VertexCycle<Real> cyc;
        int j = start;
        do {
            if (G.joints[j].kind != G.joints[start].kind)
                throw GroupError("vertex cycle mixes interior vertices and cusps");
            cyc.joints.push_back(j);
            cyc.cw.push_back(j);
            cyc.angle_sum += G.joints[j].corner;
            G.joint_cycle[j] = (int)G.cycles.size();
            j = (G.sigma[j] + 1) % m;
        } while (j != start && cyc.joints.size() <= (size_t)(4 * m));
        if (j != start) throw GroupError("vertex walk did not close");
        int k = start;
        do {
            int letter = (k + m - 1) % m;
            cyc.acw.push_back(letter);
            k = G.sigma[letter];
        } while (k != start && cyc.acw.size() <= (size_t)(4 * m));
        cyc.cusp = G.joints[start].kind == JointKind::cusp;
        cyc.product = G.eval(cyc.cw);
        auto cl = classify(cyc.product);
        if (cyc.cusp) {
            if (cl.kind != MoebiusKind::parabolic)
                throw GroupError(std::string("cusp cycle product is ") + to_string(cl.kind) + ", expected parabolic");
        } else {
            // copies around the vertex must close up after exactly one turn
            if (abs(cyc.angle_sum - tp) > Real(1e-8)) {
                std::ostringstream os;
                os << "vertex cycle at joint " << start + 1 << " has angle sum " << double(cyc.angle_sum)
                   << " (need 2 pi); the pairing does not give a surface group";
                throw GroupError(os.str());
            }
            if (cyc.product.distance_to(M()) > Real(1e-8))
                throw GroupError("vertex cycle relation does not evaluate to the identity");
            if (cyc.cw.size() % 2) throw GroupError("odd vertex cycle length");
            cyc.n = (int)cyc.cw.size() / 2;
        }
        G.cycles.push_back(cyc);
    }

    // rotation symmetry
    G.rotation_step = 0;
    for (int r = 1; r < m; ++r) {
        if (m % r) continue;
        Real rot = tp * r / m;
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
            int k = (i + r) % m;
            ok = chord<Real>(G.P[i] + rot, G.P[k]) < tol && chord<Real>(G.Q[i] + rot, G.Q[k]) < tol &&
                 G.sigma[k] == (G.sigma[i] + r) % m;
            if (ok) {
                auto R = M::rotation(rot);
                ok = compose(compose(R, G.gen[i]), R.inverse()).distance_to(G.gen[k]) < tol;
            }
        }
        if (ok) {
            G.rotation_step = r;
            break;
        }
    }
    return G;
}

// Report-only: at each interior vertex the corner angles of n(v) consecutive copies sum to pi.
template <class Real>
EvenCornerReport<Real> even_corner_check(const GroupPresentation<Real>& G, double tol = 1e-8) {
    using std::abs;
    EvenCornerReport<Real> rep;
    for (const auto& c : G.cycles) {
        if (c.cusp) continue;
        int L = (int)c.joints.size();
        for (int s = 0; s < L; ++s) {
            Real sum = 0;
            for (int k = 0; k < c.n; ++k) sum += G.joints[c.joints[(s + k) % L]].corner;
            if (abs(sum - pi_v<Real>()) > Real(tol)) {
                rep.pass = false;
                std::ostringstream os;
                os << "joint " << c.joints[s] + 1 << ": " << c.n << " consecutive corners sum to " << double(sum);
                rep.violations.push_back(os.str());
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------- words

inline std::string word_string(const Word& w) {
    std::string s;
    for (size_t k = 0; k < w.size(); ++k) {
        if (k) s += ' ';
        s += 'e' + std::to_string(w[k] + 1);
    }
    return s;
}

template <class Real>
bool is_reduced(const GroupPresentation<Real>& G, const Word& w) {
    for (size_t k = 1; k < w.size(); ++k)
        if (w[k] == G.inv(w[k - 1])) return false;
    return true;
}

// Cycle tables: cyclic windows of the vertex words.
struct CycleTables {
    std::vector<Word> forbidden_half;   // half cycles with the forbidden orientation
    std::vector<Word> allowed_half;     // the complementary orientation
    std::vector<Word> long_cycles;      // length n(v)+1, both orientations
    // for a forbidden half cycle h, the allowed half cycle k with h = k as group elements
    std::map<Word, Word> replacement;
};

template <class Real>
CycleTables cycle_tables(const GroupPresentation<Real>& G, Orientation forbid) {
    CycleTables T;
    std::set<Word> fh, ah, lc;
    for (const auto& c : G.cycles) {
        if (c.cusp) continue;
        int L = (int)c.cw.size(), n = c.n;
        const Word& bad = forbid == Orientation::ccw ? c.acw : c.cw;
        const Word& good = forbid == Orientation::ccw ? c.cw : c.acw;
        for (int s = 0; s < L; ++s) {
            Word h, rest, lg, lb;
            for (int k = 0; k < n; ++k) h.push_back(bad[(s + k) % L]);
            for (int k = n; k < L; ++k) rest.push_back(bad[(s + k) % L]);
            // h * rest = 1, so h = rest^{-1}
            Word k2;
            for (auto it = rest.rbegin(); it != rest.rend(); ++it) k2.push_back(G.inv(*it));
            fh.insert(h);
            T.replacement[h] = k2;
            Word g;
            for (int k = 0; k < n; ++k) g.push_back(good[(s + k) % L]);
            ah.insert(g);
            for (int k = 0; k <= n; ++k) lg.push_back(good[(s + k) % L]), lb.push_back(bad[(s + k) % L]);
            lc.insert(lg);
            lc.insert(lb);
        }
    }
    T.forbidden_half.assign(fh.begin(), fh.end());
    T.allowed_half.assign(ah.begin(), ah.end());
    T.long_cycles.assign(lc.begin(), lc.end());
    return T;
}

// Aho-Corasick automaton over the letters, with every state that completes a
// forbidden pattern removed. The surviving states recognise the admissible words.
struct WordAutomaton {
    int alphabet{0};
    int start{0};
    std::vector<std::vector<int>> next;  // -1 = dead
    int size() const { return (int)next.size(); }

    bool accepts(const Word& w) const {
        int s = start;
        for (int x : w) {
            s = next[s][x];
            if (s < 0) return false;
        }
        return true;
    }
    // number of accepted words of each length 0..n
    std::vector<double> counts(int n) const {
        std::vector<double> cur(size(), 0.0), out;
        cur[start] = 1;
        out.push_back(1);
        for (int k = 1; k <= n; ++k) {
            std::vector<double> nx(size(), 0.0);
            for (int s = 0; s < size(); ++s)
                if (cur[s] != 0)
                    for (int x = 0; x < alphabet; ++x)
                        if (next[s][x] >= 0) nx[next[s][x]] += cur[s];
            cur.swap(nx);
            out.push_back(std::accumulate(cur.begin(), cur.end(), 0.0));
        }
        return out;
    }
};

inline WordAutomaton build_pattern_automaton(int alphabet, const std::vector<Word>& patterns) {
    std::vector<std::vector<int>> go(1, std::vector<int>(alphabet, -1));
    std::vector<char> term(1, 0);
    for (const auto& p : patterns) {
        int s = 0;
        for (int x : p) {
            if (go[s][x] < 0) {
                go[s][x] = (int)go.size();
                go.emplace_back(alphabet, -1);
                term.push_back(0);
            }
            s = go[s][x];
        }
        term[s] = 1;
    }
    std::vector<int> fail(go.size(), 0);
    std::queue<int> q;
    for (int x = 0; x < alphabet; ++x) {
        if (go[0][x] < 0) go[0][x] = 0;
        else {
            fail[go[0][x]] = 0;
            q.push(go[0][x]);
        }
    }
    while (!q.empty()) {
        int s = q.front();
        q.pop();
        term[s] = term[s] || term[fail[s]];
        for (int x = 0; x < alphabet; ++x) {
            int t = go[s][x];
            if (t < 0) go[s][x] = go[fail[s]][x];
            else {
                fail[t] = go[fail[s]][x];
                q.push(t);
            }
        }
    }
    // compact: drop terminal states
    std::vector<int> id(go.size(), -1);
    int cnt = 0;
    for (size_t s = 0; s < go.size(); ++s)
        if (!term[s]) id[s] = cnt++;
    WordAutomaton A;
    A.alphabet = alphabet;
    A.start = id[0];
    A.next.assign(cnt, std::vector<int>(alphabet, -1));
    for (size_t s = 0; s < go.size(); ++s) {
        if (term[s]) continue;
        for (int x = 0; x < alphabet; ++x) A.next[id[s]][x] = id[go[s][x]];
    }
    return A;
}

template <class Real>
WordAutomaton admissible_automaton(const GroupPresentation<Real>& G, Orientation forbid) {
    auto T = cycle_tables(G, forbid);
    std::vector<Word> pats;
    for (int x = 0; x < G.m; ++x) pats.push_back({x, G.inv(x)});
    for (const auto& w : T.forbidden_half) pats.push_back(w);
    for (const auto& w : T.long_cycles) pats.push_back(w);
    return build_pattern_automaton(G.m, pats);
}

namespace detail {
inline long find_sub(const Word& w, const Word& p, size_t from = 0) {
    if (p.empty() || p.size() > w.size()) return -1;
    for (size_t k = from; k + p.size() <= w.size(); ++k)
        if (std::equal(p.begin(), p.end(), w.begin() + (long)k)) return (long)k;
    return -1;
}
}  // namespace detail

// Rewrites a shortest word into the admissible spelling of the same element by
// replacing forbidden half cycles with their complements. Throws if the word
// turns out not to be shortest, naming the offending subword.
template <class Real>
Word reduce_to_admissible(const GroupPresentation<Real>& G, const Word& w, Orientation forbid = Orientation::ccw,
                          size_t max_len = 64) {
    if (w.size() > max_len) throw GroupError("word longer than the rewriting budget");
    auto T = cycle_tables(G, forbid);
    Word cur = w;
    const size_t cap = 64 * (w.size() + 1);
    for (size_t iter = 0; iter < cap; ++iter) {
        for (size_t k = 1; k < cur.size(); ++k)
            if (cur[k] == G.inv(cur[k - 1]))
                throw GroupError("not shortest: cancelling pair " + word_string({cur[k - 1], cur[k]}));
        for (const auto& lc : T.long_cycles) {
            long at = detail::find_sub(cur, lc);
            if (at >= 0) throw GroupError("not shortest: long cycle " + word_string(lc));
        }
        bool changed = false;
        for (const auto& h : T.forbidden_half) {
            long at = detail::find_sub(cur, h);
            if (at < 0) continue;
            const Word& k2 = T.replacement.at(h);
            Word nx(cur.begin(), cur.begin() + at);
            nx.insert(nx.end(), k2.begin(), k2.end());
            nx.insert(nx.end(), cur.begin() + at + (long)h.size(), cur.end());
            cur.swap(nx);
            changed = true;
            break;
        }
        if (!changed) return cur;
    }
    throw GroupError("rewriting did not terminate");
}

template <class Real>
bool is_admissible(const GroupPresentation<Real>& G, const Word& w, Orientation forbid = Orientation::ccw) {
    return admissible_automaton(G, forbid).accepts(w);
}

// Visits every admissible word of length n; throws past the node budget.
template <class Real, class Fn>
void enumerate_admissible(const GroupPresentation<Real>& G, int n, Fn&& visit, Orientation forbid = Orientation::ccw,
                          double node_budget = 5e7) {
    auto A = admissible_automaton(G, forbid);
    auto c = A.counts(n);
    double nodes = std::accumulate(c.begin(), c.end(), 0.0);
    if (nodes > node_budget) throw GroupError("enumeration exceeds node budget");
    Word w;
    std::function<void(int)> rec = [&](int s) {
        if ((int)w.size() == n) {
            visit(static_cast<const Word&>(w));
            return;
        }
        for (int x = 0; x < G.m; ++x) {
            int t = A.next[s][x];
            if (t < 0) continue;
            w.push_back(x);
            rec(t);
            w.pop_back();
        }
    };
    rec(A.start);
}

template <class Real>
std::vector<Word> enumerate_admissible(const GroupPresentation<Real>& G, int n, Orientation forbid = Orientation::ccw,
                                       double node_budget = 5e7) {
    std::vector<Word> out;
    enumerate_admissible(G, n, [&](const Word& w) { out.push_back(w); }, forbid, node_budget);
    return out;
}

}  // namespace bsthermo
