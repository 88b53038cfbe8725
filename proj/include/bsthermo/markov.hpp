#pragma once

// Finite Markov partition for f, its k-cylinder refinements, and the induced
// first-return system over the cusp-free core.

#include <cmath>
#include <sstream>

#include "bs_map.hpp"

namespace bsthermo {

class MarkovError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

template <class Real>
struct VertexData {
    int joint{0};
    Real angle{0};  // boundary position for cusps and improper vertices
    JointKind kind{JointKind::interior};
    bool improper{false};
    std::vector<Real> W;        // W(v), truncated for cusps
    std::vector<Real> W_prime;  // W'(v)
    // Cusps only. x_r, y_r are the vertex-geodesic ends on either side of the far end Q
    // of side i, numbered away from Q, so L_r = [x_r, x_{r-1}) and R_r = [y_{r-1}, y_r)
    // with x_0 = y_0 = Q. With depth d, L(v) = [v, x_{d-1}) and R(v) = [y_d, v); the exit
    // arcs are L_{d-1} and R_d. Depth 2 gives W'(v) = {v, x_1, Q, y_1, y_2}.
    std::vector<Real> x, y;
    Arc<Real> L, R, exit_L, exit_R;
};

template <class Real>
struct CuspCombinatorics {
    std::vector<VertexData<Real>> vertices;
    std::vector<Real> W_prime;  // sorted, deduplicated
    Orientation orientation{Orientation::ccw};
    int cusp_depth{2};
};

namespace detail {

template <class Real>
void add_side_endpoints(std::vector<Real>& out, const GroupPresentation<Real>& G, const MoebiusTransform<Real>& g, int side) {
    int s = (side % G.m + G.m) % G.m;
    out.push_back(wrap_angle<Real>(g.act(G.P[s])));
    out.push_back(wrap_angle<Real>(g.act(G.Q[s])));
}

template <class Real>
void dedupe(std::vector<Real>& v, Real tol) {
    std::sort(v.begin(), v.end());
    std::vector<Real> out;
    for (const auto& x : v)
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    if (out.size() > 1 && out.front() + two_pi_v<Real>() - out.back() <= tol) out.pop_back();
    v.swap(out);
}

// endpoints of the side geodesics of copies around joint j, walking `steps` copies each way
template <class Real>
std::vector<Real> vertex_geodesic_endpoints(const GroupPresentation<Real>& G, int joint, int steps) {
    std::vector<Real> W;
    const int m = G.m;
    MoebiusTransform<Real> g;
    int j = joint;
    for (int r = 0; r < steps; ++r) {
        add_side_endpoints(W, G, g, j - 1);
        add_side_endpoints(W, G, g, j);
        g = compose(g, G.gen[j]);
        j = (G.sigma[j] + 1) % m;
    }
    g = MoebiusTransform<Real>();
    j = joint;
    for (int r = 0; r < steps; ++r) {
        add_side_endpoints(W, G, g, j - 1);
        add_side_endpoints(W, G, g, j);
        int letter = (j + m - 1) % m;
        g = compose(g, G.gen[letter]);
        j = G.sigma[letter];
    }
    return W;
}

}  // namespace detail

template <class Real>
CuspCombinatorics<Real> build_W_prime_at_depth(const BSMap<Real>& F, int depth, int cusp_steps = 40) {
    if (depth < 2) throw MarkovError("cusp depth must be at least 2");
    const auto& G = F.G();
    const Real tol = Real(1e-11);
    CuspCombinatorics<Real> C;
    C.orientation = F.forbid;
    C.cusp_depth = depth;
    for (int i = 0; i < G.m; ++i) {
        const auto& J = G.joints[i];
        if (J.kind == JointKind::interior) {
            VertexData<Real> v;
            v.joint = i;
            v.kind = J.kind;
            int L = (int)G.cycles[G.joint_cycle[i]].cw.size();
            v.W = detail::vertex_geodesic_endpoints(G, i, L);
            detail::dedupe(v.W, tol);
            v.W_prime = v.W;
            C.vertices.push_back(v);
        } else if (J.kind == JointKind::cusp) {
            VertexData<Real> v;
            v.joint = i;
            v.kind = J.kind;
            v.angle = G.P[i];
            v.W = detail::vertex_geodesic_endpoints(G, i, cusp_steps);
            detail::dedupe(v.W, tol);
            Real q = G.Q[i];  // far end of side i
            Real dq = ccw_dist<Real>(v.angle, q);
            std::vector<Real> xs, ys;  // ccw distances from v, on either side of q
            for (const auto& w : v.W) {
                Real d = ccw_dist<Real>(v.angle, w);
                if (d < tol || d > two_pi_v<Real>() - tol) continue;
                if (d < dq - tol) xs.push_back(d);
                else if (d > dq + tol) ys.push_back(d);
            }
            std::sort(xs.rbegin(), xs.rend());  // x_1 nearest q
            std::sort(ys.begin(), ys.end());    // y_1 nearest q
            if ((int)xs.size() < depth - 1 || (int)ys.size() < depth)
                throw MarkovError("cusp at joint " + std::to_string(i + 1) + ": too few vertex geodesics");
            for (int r = 0; r < depth - 1; ++r) v.x.push_back(wrap_angle<Real>(v.angle + xs[r]));
            for (int r = 0; r < depth; ++r) v.y.push_back(wrap_angle<Real>(v.angle + ys[r]));
            Real qq = wrap_angle<Real>(q);
            v.L = Arc<Real>(v.angle, xs[depth - 2]);
            v.R = Arc<Real>(v.y.back(), two_pi_v<Real>() - ys[depth - 1]);
            v.exit_L = Arc<Real>::between(v.x[depth - 2], depth >= 3 ? v.x[depth - 3] : qq);
            v.exit_R = Arc<Real>::between(depth >= 2 ? v.y[depth - 2] : qq, v.y[depth - 1]);
            v.W_prime = {v.angle, wrap_angle<Real>(q)};
            v.W_prime.insert(v.W_prime.end(), v.x.begin(), v.x.end());
            v.W_prime.insert(v.W_prime.end(), v.y.begin(), v.y.end());
            detail::dedupe(v.W_prime, tol);
            C.vertices.push_back(v);
        } else {
            // a free side: its two improper ends
            for (int s : {(i + G.m - 1) % G.m, i}) {
                VertexData<Real> v;
                v.joint = i;
                v.kind = J.kind;
                v.improper = true;
                v.angle = s == i ? G.P[i] : G.Q[s];
                v.W = {G.P[s], G.Q[s]};
                detail::dedupe(v.W, tol);
                v.W_prime = v.W;
                C.vertices.push_back(v);
            }
        }
    }
    for (const auto& v : C.vertices) C.W_prime.insert(C.W_prime.end(), v.W_prime.begin(), v.W_prime.end());
    detail::dedupe(C.W_prime, tol);
    return C;
}

// Exit arcs must avoid every cusp neighbourhood, otherwise first returns to the core can
// chain excursions at different cusps. Depth 2 is the smallest admissible choice; when two
// adjacent vertices are cusps it fails, since R_2 of one starts at the other, and the
// neighbourhoods are shrunk one level at a time.
template <class Real>
bool exits_clear(const CuspCombinatorics<Real>& C) {
    auto overlap = [](const Arc<Real>& a, const Arc<Real>& b) {
        return intersect<Real>(a, b, Real(1e-11)).has_value();
    };
    for (const auto& v : C.vertices) {
        if (v.kind != JointKind::cusp) continue;
        for (const auto& w : C.vertices) {
            if (w.kind != JointKind::cusp) continue;
            for (const auto& e : {v.exit_L, v.exit_R})
                if (overlap(e, w.L) || overlap(e, w.R)) return false;
        }
    }
    return true;
}

template <class Real>
CuspCombinatorics<Real> build_W_prime(const BSMap<Real>& F, int max_depth = 6) {
    for (int d = 2; d <= max_depth; ++d) {
        auto C = build_W_prime_at_depth(F, d);
        if (!F.G().has_cusps() || exits_clear(C)) return C;
    }
    throw MarkovError("cusp neighbourhoods overlap the exit arcs at every depth up to " + std::to_string(max_depth));
}

template <class Real>
int nearest_point(const std::vector<Real>& pts, Real t, Real* dist = nullptr) {
    int best = -1;
    Real bd = 1e9;
    for (size_t k = 0; k < pts.size(); ++k) {
        Real d = chord<Real>(pts[k], t);
        if (d < bd) bd = d, best = (int)k;
    }
    if (dist) *dist = bd;
    return best;
}

struct InvarianceReport {
    bool pass{true};
    double max_mismatch{0};
    std::vector<std::string> orphans;
};

// f(W') must land in W'. Points outside the domain of f are skipped.
template <class Real>
InvarianceReport check_invariance(const BSMap<Real>& F, const CuspCombinatorics<Real>& C, double tol = 1e-9) {
    InvarianceReport rep;
    for (const auto& w : C.W_prime) {
        auto im = F.apply(w);
        if (!im) continue;
        Real d;
        nearest_point(C.W_prime, im->second, &d);
        rep.max_mismatch = std::max(rep.max_mismatch, double(d));
        if (d > Real(tol)) {
            rep.pass = false;
            std::ostringstream os;
            os.precision(12);
            os << "f(" << double(w) << ") = " << double(im->second) << " is not in W' (off by " << double(d) << ")";
            rep.orphans.push_back(os.str());
        }
    }
    return rep;
}

template <class Real>
struct MarkovPartition {
    std::vector<Arc<Real>> cells;
    std::vector<int> letter;                // branch letter on each cell
    std::vector<std::vector<int>> succ;     // transition lists
    std::vector<char> core;                 // outside every cusp arc L(v), R(v)
    std::vector<int> cusp_of;               // cusp vertex whose L or R contains the cell, -1 if none
    double max_image_mismatch{0};
    int size() const { return (int)cells.size(); }
    bool has(int a, int b) const { return std::find(succ[a].begin(), succ[a].end(), b) != succ[a].end(); }
    int cell_of(Real t) const {
        Real u = wrap_angle<Real>(t + eps_v<Real>());
        for (int k = 0; k < size(); ++k)
            if (cells[k].contains(u)) return k;
        return -1;
    }
    std::vector<std::vector<char>> matrix() const {
        std::vector<std::vector<char>> T(size(), std::vector<char>(size(), 0));
        for (int a = 0; a < size(); ++a)
            for (int b : succ[a]) T[a][b] = 1;
        return T;
    }
};

// strongly connected components (iterative Tarjan)
inline std::vector<int> scc_ids(const std::vector<std::vector<int>>& succ, int* count = nullptr) {
    int n = (int)succ.size(), idx = 0, comp = 0;
    std::vector<int> index(n, -1), low(n, 0), id(n, -1), stack;
    std::vector<char> on(n, 0);
    for (int s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        std::vector<std::pair<int, size_t>> work{{s, 0}};
        index[s] = low[s] = idx++;
        stack.push_back(s);
        on[s] = 1;
        while (!work.empty()) {
            auto& [v, it] = work.back();
            if (it < succ[v].size()) {
                int w = succ[v][it++];
                if (index[w] < 0) {
                    index[w] = low[w] = idx++;
                    stack.push_back(w);
                    on[w] = 1;
                    work.emplace_back(w, 0);
                } else if (on[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                if (low[v] == index[v]) {
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on[w] = 0;
                        id[w] = comp;
                    } while (w != v);
                    ++comp;
                }
                int done = v;
                work.pop_back();
                if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
            }
        }
    }
    if (count) *count = comp;
    return id;
}

template <class Real>
MarkovPartition<Real> build_partition(const BSMap<Real>& F, const CuspCombinatorics<Real>& C, double tol = 1e-9) {
    MarkovPartition<Real> MP;
    const auto& W = C.W_prime;
    const int n = (int)W.size();
    for (int k = 0; k < n; ++k) {
        Real s = W[k], e = W[(k + 1) % n];
        Arc<Real> a = Arc<Real>::between(s, e);
        if (n == 1) a = Arc<Real>(s, two_pi_v<Real>());
        Real mid = wrap_angle<Real>(a.start + a.length / 2);
        int l = F.branch_of(mid);
        if (l < 0) continue;  // a gap of the domain
        if (F.branch_of(a.start) != l) throw MarkovError("cell straddles a branch breakpoint");
        MP.cells.push_back(a);
        MP.letter.push_back(l);
    }
    const int N = MP.size();
    MP.succ.assign(N, {});
    for (int a = 0; a < N; ++a) {
        Arc<Real> im = image(F.G().gen_bar[MP.letter[a]], MP.cells[a]);
        Real d0, d1;
        nearest_point(W, im.start, &d0);
        nearest_point(W, im.end(), &d1);
        MP.max_image_mismatch = std::max({MP.max_image_mismatch, double(d0), double(d1)});
        if (d0 > Real(tol) || d1 > Real(tol)) {
            std::ostringstream os;
            os << "Markov property fails on cell " << a << ": image endpoint off W' by " << double(std::max(d0, d1));
            throw MarkovError(os.str());
        }
        for (int b = 0; b < N; ++b) {
            Real mid = wrap_angle<Real>(MP.cells[b].start + MP.cells[b].length / 2);
            if (im.contains(mid)) MP.succ[a].push_back(b);
        }
    }
    // irreducibility after trimming cells that cannot be visited forever
    int comps;
    auto id = scc_ids(MP.succ, &comps);
    std::vector<int> size(comps, 0);
    for (int v : id) ++size[v];
    int recurrent = 0;
    for (int c = 0; c < comps; ++c) {
        bool cyc = size[c] > 1;
        for (int a = 0; a < N && !cyc; ++a)
            if (id[a] == c && MP.has(a, a)) cyc = true;
        recurrent += cyc;
    }
    if (recurrent != 1) throw MarkovError("transition matrix is not irreducible (" + std::to_string(recurrent) + " recurrent classes)");
    // core and cusp neighbourhoods
    MP.core.assign(N, 1);
    MP.cusp_of.assign(N, -1);
    for (size_t vi = 0; vi < C.vertices.size(); ++vi) {
        const auto& v = C.vertices[vi];
        if (v.kind != JointKind::cusp) continue;
        for (int a = 0; a < N; ++a) {
            Real mid = wrap_angle<Real>(MP.cells[a].start + MP.cells[a].length / 2);
            if (v.L.contains(mid) || v.R.contains(mid)) {
                MP.core[a] = 0;
                MP.cusp_of[a] = (int)vi;
            }
        }
    }
    return MP;
}

// ---------------------------------------------------------------- refinement

// States are admissible k-paths of cells; an edge u -> u' appends one cell. The edge
// carries the range of log|f'| over the (k+1)-cylinder, which is exact for the
// one-step branch.
template <class Real>
struct Refinement {
    int k{1};
    std::vector<std::vector<int>> paths;
    std::vector<Arc<Real>> arcs;
    struct Edge {
        int to;
        double log_lo, log_hi;  // range of log|f'| on the (k+1)-cylinder
    };
    std::vector<std::vector<Edge>> edges;
    int size() const { return (int)paths.size(); }
    std::size_t edge_count() const {
        std::size_t c = 0;
        for (const auto& e : edges) c += e.size();
        return c;
    }
};

template <class Real>
std::size_t count_paths(const MarkovPartition<Real>& MP, int k) {
    std::vector<double> c(MP.size(), 1.0);
    for (int s = 1; s < k; ++s) {
        std::vector<double> nx(MP.size(), 0.0);
        for (int a = 0; a < MP.size(); ++a)
            for (int b : MP.succ[a]) nx[a] += c[b];
        c.swap(nx);
    }
    double t = 0;
    for (double x : c) t += x;
    return (std::size_t)t;
}

template <class Real>
Refinement<Real> refine(const BSMap<Real>& F, const MarkovPartition<Real>& MP, int k) {
    if (k < 1) throw std::invalid_argument("refinement depth must be positive");
    const auto& G = F.G();
    Refinement<Real> R;
    R.k = k;
    std::map<std::vector<int>, int> id;
    std::vector<int> path;
    std::function<void(const MoebiusTransform<Real>&)> rec = [&](const MoebiusTransform<Real>& g) {
        if ((int)path.size() == k) {
            id[path] = (int)R.paths.size();
            R.paths.push_back(path);
            R.arcs.push_back(image(g, MP.cells[path.back()]));
            return;
        }
        for (int b : MP.succ[path.back()]) {
            auto h = compose(g, G.gen[MP.letter[path.back()]]);
            path.push_back(b);
            rec(h);
            path.pop_back();
        }
    };
    for (int a = 0; a < MP.size(); ++a) {
        path = {a};
        rec(MoebiusTransform<Real>());
    }
    R.edges.assign(R.size(), {});
    for (int u = 0; u < R.size(); ++u) {
        const auto& p = R.paths[u];
        const auto& e = G.gen[MP.letter[p[0]]];
        std::vector<int> q(p.begin() + 1, p.end());
        for (int b : MP.succ[p.back()]) {
            q.push_back(b);
            int v = id.at(q);
            q.pop_back();
            // |f'| on e(A) is 1/|e'| on A
            auto [dlo, dhi] = derivative_range(e, R.arcs[v]);
            R.edges[u].push_back({v, -double(std::log(dhi)), -double(std::log(dlo))});
        }
    }
    return R;
}

// Largest k whose refinement fits the state and edge budgets.
template <class Real>
int auto_refinement_depth(const MarkovPartition<Real>& MP, std::size_t state_budget = 60000, int kmax = 10) {
    int k = 1;
    while (k < kmax && count_paths(MP, k + 2) <= state_budget * 8 && count_paths(MP, k + 1) <= state_budget) ++k;
    return k;
}

// ---------------------------------------------------------------- induced system

struct InducedBranch {
    int from{0}, to{0};      // refined core states
    int time{0};             // inducing time t
    double log_lo{0}, log_hi{0};  // range of log|(f^t)'| over the branch cylinder
    double length{0};        // Lebesgue length of the branch cylinder
};

struct InducedSystem {
    bool trivial{false};
    int k{1};
    int n_max{400};
    std::vector<std::vector<int>> states;  // core k-paths
    std::vector<InducedBranch> branches;
    std::vector<int> count_by_time;        // number of induced cells per inducing time
    std::vector<double> length_by_time;    // total cylinder length per inducing time
    int core_cells{0};
    int cells{0};
    int cusp_vertices{0};
    int size() const { return (int)states.size(); }
};

template <class Real>
InducedSystem build_induced(const BSMap<Real>& F, const MarkovPartition<Real>& MP, int n_max = 400, int k = 1) {
    if (n_max < 2) throw MarkovError("N_max must be at least 2");
    const auto& G = F.G();
    using M = MoebiusTransform<Real>;
    InducedSystem S;
    S.k = k;
    S.n_max = n_max;
    S.cells = MP.size();
    S.cusp_vertices = G.num_cusps();
    for (int a = 0; a < MP.size(); ++a) S.core_cells += MP.core[a];
    S.count_by_time.assign(n_max + 1, 0);
    S.length_by_time.assign(n_max + 1, 0.0);
    if (!G.has_cusps()) S.trivial = true;

    // core k-paths: first cell in the core
    std::map<std::vector<int>, int> id;
    std::vector<int> path;
    std::function<void()> grow = [&]() {
        if ((int)path.size() == k) {
            id[path] = (int)S.states.size();
            S.states.push_back(path);
            return;
        }
        for (int b : MP.succ[path.back()]) {
            path.push_back(b);
            grow();
            path.pop_back();
        }
    };
    for (int a = 0; a < MP.size(); ++a)
        if (MP.core[a]) {
            path = {a};
            grow();
        }

    // Walk u_0 c_1 ... c_{t-1} (non-core) c_t (core), then k-1 free cells. The running
    // product E = e_{l(u0)} ... e_{l(c_{t-1})} maps the target cylinder back to the branch.
    for (int u = 0; u < S.size(); ++u) {
        const auto& su = S.states[u];
        std::vector<int> full{su[0]};
        std::function<void(const M&, int)> tail_cells;
        std::function<void(const M&)> excursion = [&](const M& E) {
            int t = (int)full.size();  // cells visited so far = time of the next arrival
            if (t > n_max) return;
            for (int b : MP.succ[full.back()]) {
                if (t < k && b != su[t]) continue;
                M E2 = compose(E, G.gen[MP.letter[full.back()]]);
                full.push_back(b);
                if (MP.core[b]) tail_cells(E2, t);
                else excursion(E2);
                full.pop_back();
            }
        };
        tail_cells = [&](const M& E, int t) {
            if ((int)full.size() < t + k) {
                int pos = (int)full.size();
                for (int b : MP.succ[full.back()]) {
                    if (pos < k && b != su[pos]) continue;
                    full.push_back(b);
                    tail_cells(E, t);
                    full.pop_back();
                }
                return;
            }
            std::vector<int> target(full.end() - k, full.end());
            auto it = id.find(target);
            if (it == id.end()) return;
            // cylinder of the target state
            M g;
            for (int j = 0; j + 1 < k; ++j) g = compose(g, G.gen[MP.letter[target[j]]]);
            Arc<Real> A = image(g, MP.cells[target.back()]);
            auto [dlo, dhi] = derivative_range(E, A);  // |E'| on A; |(f^t)'| = 1/|E'|
            Arc<Real> cyl = image(E, A);
            InducedBranch br;
            br.from = u;
            br.to = it->second;
            br.time = t;
            br.log_lo = -double(std::log(dhi));
            br.log_hi = -double(std::log(dlo));
            br.length = double(cyl.length);
            S.branches.push_back(br);
            S.count_by_time[t] += 1;
            S.length_by_time[t] += br.length;
        };
        // the first k cells of the assembled path must spell the state u
        excursion(M());
    }
    return S;
}

}  // namespace bsthermo
