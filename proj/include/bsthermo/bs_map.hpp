#pragma once

// The boundary map f, f-expansions, cylinders, and geodesic cutting sequences.

#include <map>
#include <memory>
#include <optional>

#include "group.hpp"

namespace bsthermo {

template <class Real>
struct Branch {
    int letter{0};
    Arc<Real> arc;
};

template <class Real>
struct BSMap {
    using M = MoebiusTransform<Real>;
    std::shared_ptr<const GroupPresentation<Real>> group;
    std::shared_ptr<const GroupPresentation<Mp50>> group_hp;  // used by the tracer
    std::vector<Branch<Real>> branches;                       // indexed by letter
    std::vector<Real> breakpoints;
    Orientation forbid{Orientation::ccw};
    Real tol{eps_v<Real>()};

    const GroupPresentation<Real>& G() const { return *group; }
    int m() const { return group->m; }
    bool first_kind() const { return group->first_kind; }

    Real domain_measure() const {
        Real s = 0;
        for (const auto& b : branches) s += b.arc.length;
        return s;
    }
    // letter of the branch arc containing t, or -1 outside the domain
    int branch_of(Real t) const {
        Real u = wrap_angle<Real>(t + tol);
        for (const auto& b : branches)
            if (b.arc.contains(u)) return b.letter;
        return -1;
    }
    // f on a boundary angle; nullopt when t lies in a free-side gap
    std::optional<std::pair<int, Real>> apply(Real t) const {
        int a = branch_of(t);
        if (a < 0) return std::nullopt;
        return std::make_pair(a, group->gen_bar[a].act(t));
    }
    Real log_derivative(Real t) const {
        int a = branch_of(t);
        if (a < 0) throw std::domain_error("point outside the domain of f");
        return group->gen_bar[a].log_boundary_derivative(t);
    }
};

template <class Real>
BSMap<Real> construct_bs(const GroupSpec& spec, Orientation forbid = Orientation::ccw) {
    BSMap<Real> F;
    auto G = std::make_shared<GroupPresentation<Real>>(build_group<Real>(spec));
    if constexpr (std::is_same_v<Real, Mp50>) F.group_hp = G;
    else F.group_hp = std::make_shared<GroupPresentation<Mp50>>(build_group<Mp50>(spec));
    F.group = G;
    F.forbid = forbid;
    const int m = G->m;
    for (int i = 0; i < m; ++i) {
        int k = (i + 1) % m;
        Real toP = ccw_dist<Real>(G->P[i], G->P[k]);
        Real toQ = ccw_dist<Real>(G->P[i], G->Q[i]);
        Real len = toP <= toQ + Real(1e-12) ? toP : toQ;
        if (!(len > 0)) throw std::runtime_error("empty branch arc for letter " + std::to_string(i + 1));
        F.branches.push_back({i, Arc<Real>(G->P[i], len)});
        F.breakpoints.push_back(G->P[i]);
        if (toQ < toP - Real(1e-12)) F.breakpoints.push_back(G->Q[i]);
    }
    std::sort(F.breakpoints.begin(), F.breakpoints.end());
    for (size_t k = 1; k < F.breakpoints.size(); ++k)
        if (F.breakpoints[k] - F.breakpoints[k - 1] < Real(1e-12))
            throw std::runtime_error("coincident breakpoints make the branch order ambiguous");
    return F;
}

template <class Real>
struct Expansion {
    Word word;
    int escape_index{-1};  // step at which the orbit left the domain, -1 if it did not
    Real lyapunov_sum{0};  // sum of log|f'| along the computed steps
};

template <class Real>
Expansion<Real> f_expand(const BSMap<Real>& F, Real eta, int n) {
    Expansion<Real> out;
    Real t = eta;
    for (int k = 0; k < n; ++k) {
        int a = F.branch_of(t);
        if (a < 0) {
            out.escape_index = k;
            break;
        }
        const auto& g = F.G().gen_bar[a];
        out.lyapunov_sum += g.log_boundary_derivative(t);
        out.word.push_back(a);
        t = g.act(t);
    }
    return out;
}

// ---------------------------------------------------------------- cylinders

template <class Real>
struct BSCylinder {
    Word word;
    Arc<Real> arc;
    MoebiusTransform<Real> transform;  // e_{a0} ... e_{a(n-1)}
    Arc<Real> image;                   // f^n(arc)
};

template <class Real>
std::optional<BSCylinder<Real>> try_cylinder(const BSMap<Real>& F, const Word& w) {
    const auto& G = F.G();
    std::optional<Arc<Real>> A;  // nullopt = whole domain
    MoebiusTransform<Real> g;
    const Real tol = Real(1e-13);
    for (int a : w) {
        if (a < 0 || a >= G.m) throw std::out_of_range("letter out of range");
        const auto& B = F.branches[a].arc;
        std::optional<Arc<Real>> cut = A ? intersect<Real>(*A, B, tol) : std::optional<Arc<Real>>(B);
        if (!cut) return std::nullopt;
        A = image(G.gen_bar[a], *cut);
        g = compose(g, G.gen[a]);
    }
    BSCylinder<Real> c;
    c.word = w;
    c.transform = g;
    if (!A) {
        c.arc = Arc<Real>(F.branches[0].arc.start, F.domain_measure());
        c.image = c.arc;
        return c;
    }
    c.image = *A;
    c.arc = image(g, *A);
    return c;
}

template <class Real>
BSCylinder<Real> cylinder(const BSMap<Real>& F, const Word& w) {
    auto c = try_cylinder(F, w);
    if (!c) throw GroupError("non-admissible path: " + word_string(w));
    return *c;
}

// States are the arcs f^n(Theta(w)); endpoints are snapped to a shared point list so
// that equal states compare equal.
struct GeometricAutomaton {
    int alphabet{0};
    int start{0};
    std::vector<std::vector<int>> next;
    std::vector<std::pair<double, double>> arcs;  // (start, length); state 0 is the whole domain
    int size() const { return (int)next.size(); }
    std::vector<double> counts(int n) const {
        WordAutomaton A;
        A.alphabet = alphabet;
        A.start = start;
        A.next = next;
        return A.counts(n);
    }
    WordAutomaton as_word_automaton() const {
        WordAutomaton A;
        A.alphabet = alphabet;
        A.start = start;
        A.next = next;
        return A;
    }
};

template <class Real>
GeometricAutomaton geometric_automaton(const BSMap<Real>& F, int max_states = 20000, double snap = 1e-9) {
    const auto& G = F.G();
    std::vector<Real> pts;
    auto snap_pt = [&](Real t) -> int {
        for (size_t k = 0; k < pts.size(); ++k)
            if (chord<Real>(pts[k], t) < Real(snap)) return (int)k;
        pts.push_back(wrap_angle<Real>(t));
        return (int)pts.size() - 1;
    };
    for (const auto& b : F.branches) {
        snap_pt(b.arc.start);
        snap_pt(b.arc.end());
    }
    std::map<std::pair<int, int>, int> id;
    std::vector<std::optional<Arc<Real>>> state_arc;
    GeometricAutomaton out;
    out.alphabet = G.m;
    state_arc.push_back(std::nullopt);
    out.next.emplace_back(G.m, -1);
    out.arcs.emplace_back(0.0, double(F.domain_measure()));
    for (size_t s = 0; s < state_arc.size(); ++s) {
        for (int a = 0; a < G.m; ++a) {
            const auto& B = F.branches[a].arc;
            std::optional<Arc<Real>> cut = state_arc[s] ? intersect<Real>(*state_arc[s], B, Real(1e-11)) : B;
            if (!cut) continue;
            Arc<Real> im = image(G.gen_bar[a], *cut);
            int p0 = snap_pt(im.start);
            int p1 = snap_pt(im.end());
            Real len = im.length;
            std::pair<int, int> key{p0, p1};
            if (p0 == p1) key.second = len > pi_v<Real>() ? -2 : -1;
            auto it = id.find(key);
            int t;
            if (it == id.end()) {
                t = (int)state_arc.size();
                if (t >= max_states) throw std::runtime_error("geometric automaton exceeds the state budget");
                id[key] = t;
                Real st = pts[p0];
                Real ln = p0 == p1 ? len : ccw_dist<Real>(st, pts[p1]);
                state_arc.push_back(Arc<Real>(st, ln));
                out.next.emplace_back(G.m, -1);
                out.arcs.emplace_back(double(st), double(ln));
            } else {
                t = it->second;
            }
            out.next[s][a] = t;
        }
    }
    return out;
}

// Number of words of length <= depth accepted by A but rejected by B.
inline double language_excess(const WordAutomaton& A, const WordAutomaton& B, int depth) {
    std::map<std::pair<int, int>, double> cur{{{A.start, B.start}, 1.0}};
    double excess = 0;
    for (int k = 0; k < depth; ++k) {
        std::map<std::pair<int, int>, double> nx;
        for (const auto& [st, c] : cur)
            for (int x = 0; x < A.alphabet; ++x) {
                int a = A.next[st.first][x];
                if (a < 0) continue;
                int b = B.next[st.second][x];
                if (b < 0) excess += c;
                else nx[{a, b}] += c;
            }
        cur.swap(nx);
    }
    return excess;
}

// The pattern rules are necessary conditions on f-expansion words. Picks the forbidden
// orientation whose pattern language contains the geometric one; the flag is false when
// neither does (a misconfigured polygon). Anticlockwise wins when both qualify.
template <class Real>
std::pair<Orientation, bool> resolve_orientation(const BSMap<Real>& F, int depth = 9) {
    auto geo = geometric_automaton(F).as_word_automaton();
    for (Orientation o : {Orientation::ccw, Orientation::cw})
        if (language_excess(geo, admissible_automaton(F.G(), o), depth) == 0) return {o, true};
    return {Orientation::ccw, false};
}

// The admissible words are exactly the f-expansion words, read off the geometric
// automaton. Local patterns alone (cancellations, half and long cycles) miss words
// such as two chained clockwise half cycles, which are not shortest.
template <class Real>
WordAutomaton admissible_language(const BSMap<Real>& F) {
    return geometric_automaton(F).as_word_automaton();
}

template <class Real>
bool is_admissible(const BSMap<Real>& F, const Word& w) {
    return admissible_language(F).accepts(w);
}

template <class Real, class Fn>
void enumerate_admissible(const BSMap<Real>& F, int n, Fn&& visit, double node_budget = 5e7) {
    auto A = admissible_language(F);
    auto c = A.counts(n);
    if (std::accumulate(c.begin(), c.end(), 0.0) > node_budget) throw GroupError("enumeration exceeds node budget");
    Word w;
    std::function<void(int)> rec = [&](int s) {
        if ((int)w.size() == n) {
            visit(static_cast<const Word&>(w));
            return;
        }
        for (int x = 0; x < A.alphabet; ++x) {
            int t = A.next[s][x];
            if (t < 0) continue;
            w.push_back(x);
            rec(t);
            w.pop_back();
        }
    };
    rec(A.start);
}

// Admissible spelling of the element represented by a shortest word w. Searches the
// admissible language near the hyperbolic segment from 0 to w(0); shortest words stay
// within a bounded distance of it.
template <class Real>
Word reduce_to_admissible(const BSMap<Real>& F, const Word& w) {
    using std::abs;
    using std::asinh;
    using std::norm;
    const auto& G = F.G();
    using C = complex_t<Real>;
    for (size_t k = 1; k < w.size(); ++k)
        if (w[k] == G.inv(w[k - 1])) throw GroupError("not shortest: cancelling pair " + word_string({w[k - 1], w[k]}));
    auto A = admissible_language(F);
    auto g = G.eval(w);
    Real dg = g.dist_origin();
    C p = g(C(Real(0)));
    Real pr = abs(p);
    C rot = pr > Real(1e-14) ? std::conj(p) / pr : C(Real(1));
    Real step = 0;
    for (const auto& e : G.gen) step = std::max(step, e.dist_origin());
    const Real D = 2 * step + 1;
    auto off_line = [&](const MoebiusTransform<Real>& u) {
        C z = u(C(Real(0))) * rot;
        Real s = 2 * abs(Real(std::imag(z))) / (1 - Real(norm(z)));
        return asinh(s);
    };
    std::optional<Word> found;
    Word cur;
    std::function<void(int, const MoebiusTransform<Real>&)> rec = [&](int s, const MoebiusTransform<Real>& u) {
        if (found) return;
        Real tol = Real(1e-7) * (1 + abs(g.a));
        if (u.distance_to(g) < tol) {
            if (cur.size() < w.size()) throw GroupError("not shortest: equals " + word_string(cur));
            found = cur;
            return;
        }
        if (cur.size() == w.size()) return;
        for (int x = 0; x < G.m; ++x) {
            int t = A.next[s][x];
            if (t < 0) continue;
            auto v = compose(u, G.gen[x]);
            if (v.dist_origin() > dg + D || off_line(v) > D) continue;
            cur.push_back(x);
            rec(t, v);
            cur.pop_back();
        }
    };
    rec(A.start, MoebiusTransform<Real>());
    if (!found) throw GroupError("no admissible spelling of the same length: " + word_string(w));
    return *found;
}

// ---------------------------------------------------------------- geodesic tracing

struct CuttingRecord {
    double neg{0}, pos{0};
    Word letters;
    std::vector<std::complex<double>> orbit;  // e_{i0} ... e_{ik}(0)
    std::vector<double> t;                    // d(0, orbit point)
    std::vector<MoebiusTransform<Mp50>> copies;
    bool escaped{false};    // left through a free side or into an ideal vertex
    int deformations{0};    // vertex hits resolved by the right-deformation rule
};

namespace detail {

// position along the oriented geodesic (xi, eta) where it crosses the geodesic (u1, u2);
// increases toward eta
inline Mp50 crossing_param(const complex_t<Mp50>& xi, const complex_t<Mp50>& eta, const complex_t<Mp50>& u1,
                           const complex_t<Mp50>& u2) {
    using std::abs;
    using std::log;
    return (log(abs(u1 - xi)) - log(abs(u1 - eta)) + log(abs(u2 - xi)) - log(abs(u2 - eta))) / 2;
}

inline bool in_closed_arc(const Mp50& s, const Mp50& len, const Mp50& t, const Mp50& tol) {
    Mp50 d = ccw_dist<Mp50>(s, t);
    return d <= len + tol || d >= two_pi_v<Mp50>() - tol;
}

// branch lookup on the exact high-precision data
inline int branch_of_hp(const GroupPresentation<Mp50>& H, const Mp50& t) {
    Mp50 u = wrap_angle<Mp50>(t + Mp50(1e-40));
    for (int i = 0; i < H.m; ++i) {
        Mp50 toP = ccw_dist<Mp50>(H.P[i], H.P[(i + 1) % H.m]);
        Mp50 toQ = ccw_dist<Mp50>(H.P[i], H.Q[i]);
        if (Arc<Mp50>(H.P[i], toP <= toQ + Mp50(1e-12) ? toP : toQ).contains(u)) return i;
    }
    return -1;
}

}  // namespace detail

// The geodesic meets the interior of R iff no side has both endpoints on its far side and
// every crossing into a side's half-plane precedes every crossing out of one.
template <class Real>
bool meets_interior(const BSMap<Real>& F, double neg, double pos) {
    using MP = Mp50;
    const auto& H = *F.group_hp;
    if (chord<double>(neg, pos) < 1e-12) return false;
    MP xi(neg), eta(pos);
    auto X = on_circle<MP>(xi), E = on_circle<MP>(eta);
    MP last_in(-1e300), first_out(1e300);
    for (int i = 0; i < H.m; ++i) {
        MP len = ccw_dist<MP>(H.P[i], H.Q[i]);
        bool x_in = detail::in_closed_arc(H.P[i], len, xi, MP(0));
        bool e_in = detail::in_closed_arc(H.P[i], len, eta, MP(0));
        if (x_in && e_in) return false;
        if (x_in == e_in) continue;
        MP t = detail::crossing_param(X, E, on_circle<MP>(H.P[i]), on_circle<MP>(H.Q[i]));
        if (x_in) last_in = std::max(last_in, t);
        else first_out = std::min(first_out, t);
    }
    return last_in < first_out;
}

template <class Real>
CuttingRecord cutting_sequence(const BSMap<Real>& F, double neg, double pos, int n) {
    using MP = Mp50;
    using CM = complex_t<MP>;
    using std::abs;
    const auto& H = *F.group_hp;
    if (!meets_interior(F, neg, pos)) throw std::domain_error("geodesic misses the interior of the fundamental polygon");
    CuttingRecord rec;
    rec.neg = neg;
    rec.pos = pos;
    MoebiusTransform<MP> g;
    MP xi = MP(neg), eta = MP(pos);  // endpoints in the current copy's coordinates
    const MP tie(1e-30);
    const MP push(1e-20);
    const MP edge(1e-40);
    for (int k = 0; k < n; ++k) {
        int best = -1;
        for (int attempt = 0; attempt < 4 && best < 0; ++attempt) {
            CM X = on_circle<MP>(xi), E = on_circle<MP>(eta);
            std::vector<std::pair<MP, int>> cand;
            for (int i = 0; i < H.m; ++i) {
                MP len = ccw_dist<MP>(H.P[i], H.Q[i]);
                bool e_in = detail::in_closed_arc(H.P[i], len, eta, edge);
                bool x_in = detail::in_closed_arc(H.P[i], len, xi, edge);
                if (e_in && !x_in) cand.emplace_back(detail::crossing_param(X, E, on_circle<MP>(H.P[i]), on_circle<MP>(H.Q[i])), i);
            }
            if (cand.empty()) break;
            std::sort(cand.begin(), cand.end());
            bool ambiguous = cand.size() > 1 && abs(cand[1].first - cand[0].first) < tie;
            // the endpoint sitting on a side's ideal end is also ambiguous
            for (int i = 0; i < H.m && !ambiguous; ++i)
                ambiguous = chord<MP>(eta, H.P[i]) < tie || chord<MP>(eta, H.Q[i]) < tie || chord<MP>(xi, H.P[i]) < tie ||
                            chord<MP>(xi, H.Q[i]) < tie;
            if (!ambiguous) {
                best = cand[0].second;
                break;
            }
            // deform to the right: move both ends into the arc on the right of the direction of travel
            xi = wrap_angle<MP>(xi + push);
            eta = wrap_angle<MP>(eta - push);
            ++rec.deformations;
        }
        if (best < 0) {
            rec.escaped = true;
            break;
        }
        rec.letters.push_back(best);
        g = compose(g, H.gen[best]);
        rec.copies.push_back(g);
        CM o = g(CM(MP(0)));
        rec.orbit.emplace_back(double(real(o)), double(imag(o)));
        rec.t.push_back(double(g.dist_origin()));
        const auto& eb = H.gen_bar[best];
        xi = eb.act(xi);
        eta = eb.act(eta);
    }
    return rec;
}

// ---------------------------------------------------------------- comparison of codings

struct ParallelFrame {
    int k{0};
    bool pass{false};
    enum Kind { same, side, vertex, none } kind{none};
};

struct ParallelReport {
    std::vector<ParallelFrame> frames;
    bool all_pass() const {
        for (const auto& f : frames)
            if (!f.pass) return false;
        return true;
    }
    int count(ParallelFrame::Kind k) const {
        int c = 0;
        for (const auto& f : frames) c += f.kind == k;
        return c;
    }
};

// Copies of R meeting R in a side or a vertex, as group elements. Around a cusp the
// family is infinite; powers up to cusp_depth turns are kept.
template <class Real>
std::vector<std::pair<MoebiusTransform<Mp50>, ParallelFrame::Kind>> neighbour_elements(const BSMap<Real>& F,
                                                                                     int cusp_depth = 64) {
    const auto& H = *F.group_hp;
    std::vector<std::pair<MoebiusTransform<Mp50>, ParallelFrame::Kind>> out;
    std::vector<MoebiusTransform<double>> seen;
    auto add = [&](const MoebiusTransform<Mp50>& g, ParallelFrame::Kind k) {
        MoebiusTransform<double> d({double(real(g.a)), double(imag(g.a))}, {double(real(g.b)), double(imag(g.b))});
        for (const auto& e : seen)
            if (e.distance_to(d) < 1e-9 * (1 + std::abs(d.a))) return;
        seen.push_back(d);
        out.emplace_back(g, k);
    };
    add(MoebiusTransform<Mp50>(), ParallelFrame::same);
    for (int s = 0; s < H.m; ++s) add(H.gen[s], ParallelFrame::side);
    for (const auto& c : H.cycles) {
        int L = (int)c.cw.size();
        int reps = c.cusp ? cusp_depth : 1;
        for (int s = 0; s < L; ++s) {
            // prefixes of the relator read from each joint of the cycle, both directions
            MoebiusTransform<Mp50> g, gi;
            for (int r = 0; r < reps * L; ++r) {
                g = compose(g, H.gen[c.cw[(s + r) % L]]);
                gi = compose(gi, H.gen[c.acw[(s + r) % L]]);
                add(g, ParallelFrame::vertex);
                add(gi, ParallelFrame::vertex);
            }
        }
    }
    return out;
}

// Frame k compares the copy reached by the cutting sequence with the copy a_0...a_k R
// given by the f-expansion of the forward endpoint; the two must share a side or a vertex.
template <class Real>
class ParallelChecker {
  public:
    explicit ParallelChecker(const BSMap<Real>& F, int cusp_depth = 64) : F_(F), nb_(neighbour_elements(F, cusp_depth)) {
        for (const auto& e : nb_) nbd_.push_back(to_double(e.first));
    }

    ParallelReport run(double neg, double pos, int n) const {
        const auto& H = *F_.group_hp;
        auto rec = cutting_sequence(F_, neg, pos, n);
        Word fw;
        Mp50 t(pos);
        for (int k = 0; k < n; ++k) {
            int a = detail::branch_of_hp(H, t);
            if (a < 0) break;
            fw.push_back(a);
            t = H.gen_bar[a].act(t);
        }
        ParallelReport rep;
        int len = std::min<int>((int)rec.letters.size(), (int)fw.size());
        MoebiusTransform<Mp50> h;  // (cutting copy)^{-1} (expansion copy)
        for (int k = 0; k < len; ++k) {
            h = compose(compose(H.gen_bar[rec.letters[k]], h), H.gen[fw[k]]);
            ParallelFrame fr;
            fr.k = k;
            auto hd = to_double(h);
            int bi = -1;
            double bestd = 1e300;
            for (size_t j = 0; j < nbd_.size(); ++j) {
                double d = nbd_[j].distance_to(hd);
                if (d < bestd) bestd = d, bi = (int)j;
            }
            if (bi >= 0 && nb_[bi].first.distance_to(h) < Mp50(1e-8) * (1 + abs(h.a))) {
                fr.pass = true;
                fr.kind = nb_[bi].second;
                h = nb_[bi].first;
                rep.frames.push_back(fr);
            } else {
                rep.frames.push_back(fr);
                break;  // once lost the later frames carry no information
            }
        }
        return rep;
    }

  private:
    static MoebiusTransform<double> to_double(const MoebiusTransform<Mp50>& g) {
        return MoebiusTransform<double>({double(real(g.a)), double(imag(g.a))}, {double(real(g.b)), double(imag(g.b))});
    }
    const BSMap<Real>& F_;
    std::vector<std::pair<MoebiusTransform<Mp50>, ParallelFrame::Kind>> nb_;
    std::vector<MoebiusTransform<double>> nbd_;
};

template <class Real>
ParallelReport parallel_check(const BSMap<Real>& F, double neg, double pos, int n) {
    return ParallelChecker<Real>(F).run(neg, pos, n);
}

struct GrowthComparison {
    std::vector<double> growth;    // t_k / k
    std::vector<double> lyapunov;  // (1/k) log|(f^k)'(pos)|
    std::vector<double> gap;       // |log|(f^k)'| - t_k|
};

template <class Real>
GrowthComparison growth_vs_lyapunov(const BSMap<Real>& F, double neg, double pos, int n) {
    auto rec = cutting_sequence(F, neg, pos, n);
    const auto& H = *F.group_hp;
    GrowthComparison out;
    Mp50 t(pos), lsum(0);
    int len = (int)rec.t.size();
    for (int k = 0; k < len; ++k) {
        int a = detail::branch_of_hp(H, t);
        if (a < 0) break;
        lsum += H.gen_bar[a].log_boundary_derivative(t);
        t = H.gen_bar[a].act(t);
        double kk = k + 1;
        out.growth.push_back(rec.t[k] / kk);
        out.lyapunov.push_back(double(lsum) / kk);
        out.gap.push_back(std::abs(double(lsum) - rec.t[k]));
    }
    return out;
}

}  // namespace bsthermo
