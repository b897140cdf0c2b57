#include "varsample/complexes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "varsample/rng.hpp"

namespace vs {

std::size_t SimplicialComplex::simplex_count() const {
    std::size_t n = 0;
    for (const auto& level : simplices_by_dim) n += level.size();
    return n;
}

namespace {

// ---- exact comparison fallback ---------------------------------------------

// dist^2(a,b) <=/< (factor*eps)^2, decided exactly in rationals when the
// double computation lands within 1e-12 of the threshold.
bool ball_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double factor,
               double eps, bool closed) {
    double d2 = (a - b).squaredNorm();
    double thr = factor * eps;
    double thr2 = thr * thr;
    if (std::abs(d2 - thr2) >= 1e-12 * std::max(1.0, thr2))
        return closed ? d2 <= thr2 : d2 < thr2;
    Rational d2x = 0;
    for (int i = 0; i < a.size(); ++i) {
        Rational diff = Rational(a[i]) - Rational(b[i]);
        d2x += diff * diff;
    }
    Rational thrx = Rational(factor) * Rational(eps);
    Rational thr2x = thrx * thrx;
    return closed ? d2x <= thr2x : d2x < thr2x;
}

// ---- neighbor grid ----------------------------------------------------------

// Uniform spatial hash with cell size equal to the widest query radius.
// Hash collisions only add candidates; every candidate is distance-checked.
class NeighborGrid {
  public:
    NeighborGrid(const std::vector<Eigen::VectorXd>& pts, double cell) : pts_(pts), cell_(cell) {
        for (std::size_t i = 0; i < pts.size(); ++i) buckets_[key(pts[i])].push_back(static_cast<int>(i));
    }

    // indices j > i with ||p_j - p_i|| <= cell (superset; caller re-checks)
    std::vector<int> candidates_above(int i) const {
        std::vector<int> out;
        const Eigen::VectorXd& p = pts_[i];
        const int n = static_cast<int>(p.size());
        std::vector<long long> base(n);
        for (int k = 0; k < n; ++k) base[k] = static_cast<long long>(std::floor(p[k] / cell_));
        std::vector<int> offset(n, -1);
        for (;;) {
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (int k = 0; k < n; ++k)
                h = SeedStream::mix(h, static_cast<std::uint64_t>(base[k] + offset[k] + (1LL << 40)));
            auto it = buckets_.find(h);
            if (it != buckets_.end())
                for (int j : it->second)
                    if (j > i) out.push_back(j);
            int k = 0;
            while (k < n && offset[k] == 1) offset[k++] = -1;
            if (k == n) break;
            ++offset[k];
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

  private:
    std::uint64_t key(const Eigen::VectorXd& p) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int k = 0; k < p.size(); ++k)
            h = SeedStream::mix(h, static_cast<std::uint64_t>(
                                       static_cast<long long>(std::floor(p[k] / cell_)) + (1LL << 40)));
        return h;
    }

    const std::vector<Eigen::VectorXd>& pts_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

std::vector<std::vector<int>> vertex_level(int n) {
    std::vector<std::vector<int>> v;
    v.reserve(n);
    for (int i = 0; i < n; ++i) v.push_back({i});
    return v;
}

// triangles = triples with all three edges present
std::vector<std::vector<int>> close_triangles(const std::vector<std::vector<int>>& edges,
                                              int num_vertices) {
    std::vector<std::vector<int>> adj(num_vertices);
    for (const auto& e : edges) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    std::vector<std::vector<int>> tris;
    for (const auto& e : edges) {
        int a = e[0], b = e[1];
        std::vector<int> common;
        std::set_intersection(adj[a].begin(), adj[a].end(), adj[b].begin(), adj[b].end(),
                              std::back_inserter(common));
        for (int c : common)
            if (c > b) tris.push_back({a, b, c});
    }
    std::sort(tris.begin(), tris.end());
    return tris;
}

}  // namespace

SimplicialComplex build_modified_vr(const std::vector<Eigen::VectorXd>& points,
                                    double epsilon, double rule_ii_factor) {
    if (epsilon <= 0) throw input_error("build_modified_vr: epsilon must be positive");
    SimplicialComplex K;
    K.kind = ComplexKind::modified_vr;
    K.epsilon = epsilon;
    K.num_vertices = static_cast<int>(points.size());
    K.dim_cap = 2;
    K.simplices_by_dim.assign(3, {});
    K.simplices_by_dim[0] = vertex_level(K.num_vertices);
    if (points.empty()) return K;

    NeighborGrid grid(points, rule_ii_factor * epsilon);

    // close pairs (condition i) first; they witness condition (ii)
    std::vector<std::vector<int>> close_adj(points.size());
    std::vector<std::pair<int, int>> wide_pairs;
    for (int i = 0; i < K.num_vertices; ++i) {
        for (int j : grid.candidates_above(i)) {
            if (ball_test(points[i], points[j], 2.0, epsilon, true)) {
                close_adj[i].push_back(j);
                close_adj[j].push_back(i);
            } else if (ball_test(points[i], points[j], rule_ii_factor, epsilon, true)) {
                wide_pairs.emplace_back(i, j);
            }
        }
    }
    for (auto& a : close_adj) std::sort(a.begin(), a.end());

    std::vector<std::vector<int>> edges;
    for (int i = 0; i < K.num_vertices; ++i)
        for (int j : close_adj[i])
            if (j > i) edges.push_back({i, j});
    for (const auto& [i, j] : wide_pairs) {
        std::vector<int> common;
        std::set_intersection(close_adj[i].begin(), close_adj[i].end(), close_adj[j].begin(),
                              close_adj[j].end(), std::back_inserter(common));
        if (!common.empty()) edges.push_back({i, j});
    }
    std::sort(edges.begin(), edges.end());
    K.simplices_by_dim[1] = edges;
    K.simplices_by_dim[2] = close_triangles(edges, K.num_vertices);
    return K;
}

// ---------------------------------------------------------------------------
// Cech
// ---------------------------------------------------------------------------

namespace {

// circumscribed ball of an affinely independent support set
MinBall circumball(const std::vector<Eigen::VectorXd>& R) {
    MinBall b;
    if (R.empty()) {
        b.center = Eigen::VectorXd();
        b.radius = 0.0;
        return b;
    }
    const int m = static_cast<int>(R.size());
    if (m == 1) {
        b.center = R[0];
        b.radius = 0.0;
        return b;
    }
    Eigen::MatrixXd A(m - 1, R[0].size());
    Eigen::VectorXd rhs(m - 1);
    for (int i = 1; i < m; ++i) {
        A.row(i - 1) = (R[i] - R[0]).transpose();
        rhs(i - 1) = 0.5 * A.row(i - 1).squaredNorm();
    }
    Eigen::MatrixXd G = A * A.transpose();
    Eigen::VectorXd y = G.ldlt().solve(rhs);
    b.center = R[0] + A.transpose() * y;
    b.radius = (b.center - R[0]).norm();
    return b;
}

bool in_ball(const MinBall& b, const Eigen::VectorXd& p) {
    if (b.center.size() == 0) return false;
    return (p - b.center).norm() <= b.radius * (1.0 + 1e-12) + 1e-14;
}

MinBall welzl(std::vector<Eigen::VectorXd>& P, std::vector<Eigen::VectorXd>& R, std::size_t n,
              int dim) {
    if (n == 0 || static_cast<int>(R.size()) == dim + 1) return circumball(R);
    Eigen::VectorXd p = P[n - 1];
    MinBall b = welzl(P, R, n - 1, dim);
    if (in_ball(b, p)) return b;
    R.push_back(p);
    b = welzl(P, R, n - 1, dim);
    R.pop_back();
    return b;
}

// exact radius^2 of the circumball of a support set (rational arithmetic)
Rational circumradius2_exact(const std::vector<Eigen::VectorXd>& R) {
    const int m = static_cast<int>(R.size());
    if (m <= 1) return Rational(0);
    const int n = static_cast<int>(R[0].size());
    // Gram system G y = rhs over rationals, then r^2 = |A^T y|^2
    std::vector<std::vector<Rational>> A(m - 1, std::vector<Rational>(n));
    std::vector<Rational> rhs(m - 1);
    for (int i = 1; i < m; ++i) {
        Rational s = 0;
        for (int j = 0; j < n; ++j) {
            A[i - 1][j] = Rational(R[i][j]) - Rational(R[0][j]);
            s += A[i - 1][j] * A[i - 1][j];
        }
        rhs[i - 1] = s / 2;
    }
    const int k = m - 1;
    std::vector<std::vector<Rational>> G(k, std::vector<Rational>(k + 1));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            Rational s = 0;
            for (int l = 0; l < n; ++l) s += A[i][l] * A[j][l];
            G[i][j] = s;
        }
        G[i][k] = rhs[i];
    }
    // Gaussian elimination with pivot search
    for (int col = 0; col < k; ++col) {
        int piv = -1;
        for (int r = col; r < k; ++r)
            if (G[r][col] != 0) { piv = r; break; }
        if (piv < 0) return Rational(-1);  // degenerate support; fall back to double
        std::swap(G[col], G[piv]);
        for (int r = 0; r < k; ++r) {
            if (r == col || G[r][col] == 0) continue;
            Rational f = G[r][col] / G[col][col];
            for (int cc = col; cc <= k; ++cc) G[r][cc] -= f * G[col][cc];
        }
    }
    std::vector<Rational> y(k);
    for (int i = 0; i < k; ++i) y[i] = G[i][k] / G[i][i];
    Rational r2 = 0;
    for (int l = 0; l < n; ++l) {
        Rational cl = 0;
        for (int i = 0; i < k; ++i) cl += y[i] * A[i][l];
        r2 += cl * cl;
    }
    return r2;
}

// support set: points of P on the boundary of the min ball
std::vector<Eigen::VectorXd> ball_support(const std::vector<Eigen::VectorXd>& P,
                                          const MinBall& b) {
    std::vector<Eigen::VectorXd> S;
    for (const auto& p : P) {
        if (std::abs((p - b.center).norm() - b.radius) <= 1e-9 * std::max(1.0, b.radius))
            S.push_back(p);
    }
    return S;
}

// open-ball nerve test: min enclosing ball radius < eps, with an exact
// decision from the support set when the double radius is borderline
bool cech_simplex_test(const std::vector<Eigen::VectorXd>& verts, double eps) {
    MinBall b = min_enclosing_ball(verts);
    double gap = b.radius - eps;
    if (std::abs(gap) >= 1e-12 * std::max(1.0, eps)) return b.radius < eps;
    std::vector<Eigen::VectorXd> S = ball_support(verts, b);
    Rational r2 = circumradius2_exact(S);
    if (r2 < 0) return b.radius < eps;
    Rational eps2 = Rational(eps) * Rational(eps);
    return r2 < eps2;
}

}  // namespace

MinBall min_enclosing_ball(const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) throw input_error("min_enclosing_ball: empty point set");
    std::vector<Eigen::VectorXd> P = points;
    std::vector<Eigen::VectorXd> R;
    return welzl(P, R, P.size(), static_cast<int>(points[0].size()));
}

SimplicialComplex build_cech(const std::vector<Eigen::VectorXd>& points, double epsilon,
                             int max_dim) {
    if (epsilon <= 0) throw input_error("build_cech: epsilon must be positive");
    if (max_dim < 1 || max_dim > 4)
        throw input_error("build_cech: max_dim must lie in [1, 4]");
    SimplicialComplex K;
    K.kind = ComplexKind::cech;
    K.epsilon = epsilon;
    K.num_vertices = static_cast<int>(points.size());
    K.dim_cap = max_dim;
    K.simplices_by_dim.assign(max_dim + 1, {});
    K.simplices_by_dim[0] = vertex_level(K.num_vertices);
    if (points.empty()) return K;

    NeighborGrid grid(points, 2.0 * epsilon);
    std::vector<std::vector<int>> adj(points.size());
    for (int i = 0; i < K.num_vertices; ++i) {
        for (int j : grid.candidates_above(i)) {
            // two open eps-balls meet iff the distance is < 2 eps
            if (ball_test(points[i], points[j], 2.0, epsilon, false)) {
                adj[i].push_back(j);
                adj[j].push_back(i);
                K.simplices_by_dim[1].push_back({i, j});
            }
        }
    }
    std::sort(K.simplices_by_dim[1].begin(), K.simplices_by_dim[1].end());
    for (auto& a : adj) std::sort(a.begin(), a.end());

    // extend (k-1)-simplices by a vertex adjacent to all of them
    for (int k = 2; k <= max_dim; ++k) {
        const auto& prev = K.simplices_by_dim[k - 1];
        auto& cur = K.simplices_by_dim[k];
        for (const auto& sigma : prev) {
            std::vector<int> common = adj[sigma[0]];
            for (std::size_t i = 1; i < sigma.size(); ++i) {
                std::vector<int> tmp;
                std::set_intersection(common.begin(), common.end(), adj[sigma[i]].begin(),
                                      adj[sigma[i]].end(), std::back_inserter(tmp));
                common = std::move(tmp);
            }
            for (int v : common) {
                if (v <= sigma.back()) continue;
                std::vector<Eigen::VectorXd> verts;
                verts.reserve(sigma.size() + 1);
                for (int idx : sigma) verts.push_back(points[idx]);
                verts.push_back(points[v]);
                if (cech_simplex_test(verts, epsilon)) {
                    std::vector<int> tau = sigma;
                    tau.push_back(v);
                    cur.push_back(std::move(tau));
                }
            }
        }
        std::sort(cur.begin(), cur.end());
        cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
    }
    return K;
}

// ---------------------------------------------------------------------------
// Betti numbers
// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a); b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    int components() {
        int c = 0;
        for (std::size_t i = 0; i < parent.size(); ++i) c += (find(static_cast<int>(i)) == static_cast<int>(i));
        return c;
    }
};

// GF(2) column rank of the boundary matrix d_k (faces of k-simplices),
// columns as bitsets over (k-1)-simplex indices.
long long gf2_rank(const std::vector<std::vector<int>>& lower,
                   const std::vector<std::vector<int>>& upper) {
    if (lower.empty() || upper.empty()) return 0;
    std::map<std::vector<int>, int> index;
    for (std::size_t i = 0; i < lower.size(); ++i) index[lower[i]] = static_cast<int>(i);
    const std::size_t words = (lower.size() + 63) / 64;

    auto column = [&](const std::vector<int>& s) {
        std::vector<std::uint64_t> col(words, 0);
        std::vector<int> face(s.size() - 1);
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
            int w = 0;
            for (std::size_t i = 0; i < s.size(); ++i)
                if (i != drop) face[w++] = s[i];
            auto it = index.find(face);
            if (it == index.end()) throw input_error("betti: complex is not downward closed");
            col[it->second / 64] ^= 1ULL << (it->second % 64);
        }
        return col;
    };

    auto lowest = [&](const std::vector<std::uint64_t>& col) -> int {
        for (int w = static_cast<int>(words) - 1; w >= 0; --w) {
            if (col[w]) return w * 64 + 63 - __builtin_clzll(col[w]);
        }
        return -1;
    };

    std::vector<std::vector<std::uint64_t>> pivots(lower.size());
    long long rank = 0;
    for (const auto& s : upper) {
        std::vector<std::uint64_t> col = column(s);
        int low = lowest(col);
        while (low >= 0 && !pivots[low].empty()) {
            const auto& piv = pivots[low];
            for (std::size_t w = 0; w < words; ++w) col[w] ^= piv[w];
            low = lowest(col);
        }
        if (low >= 0) {
            pivots[low] = std::move(col);
            ++rank;
        }
    }
    return rank;
}

// exact rational rank of the signed boundary matrix
long long rational_rank(const std::vector<std::vector<int>>& lower,
                        const std::vector<std::vector<int>>& upper) {
    if (lower.empty() || upper.empty()) return 0;
    std::map<std::vector<int>, int> index;
    for (std::size_t i = 0; i < lower.size(); ++i) index[lower[i]] = static_cast<int>(i);
    std::vector<std::vector<Rational>> M(upper.size(), std::vector<Rational>(lower.size(), 0));
    std::vector<int> face;
    for (std::size_t c = 0; c < upper.size(); ++c) {
        const auto& s = upper[c];
        face.assign(s.size() - 1, 0);
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
            int w = 0;
            for (std::size_t i = 0; i < s.size(); ++i)
                if (i != drop) face[w++] = s[i];
            auto it = index.find(face);
            if (it == index.end()) throw input_error("betti: complex is not downward closed");
            M[c][it->second] = (drop % 2 == 0) ? 1 : -1;
        }
    }
    long long rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < lower.size() && row < M.size(); ++col) {
        std::size_t piv = row;
        while (piv < M.size() && M[piv][col] == 0) ++piv;
        if (piv == M.size()) continue;
        std::swap(M[row], M[piv]);
        for (std::size_t r = 0; r < M.size(); ++r) {
            if (r == row || M[r][col] == 0) continue;
            Rational f = M[r][col] / M[row][col];
            for (std::size_t cc = col; cc < lower.size(); ++cc) M[r][cc] -= f * M[row][cc];
        }
        ++row;
        ++rank;
    }
    return rank;
}

}  // namespace

BettiReport betti(const SimplicialComplex& K, int top_dim, bool rational_coeffs) {
    if (top_dim < 0 || top_dim > K.dim_cap - 1)
        throw input_error("betti: top_dim " + std::to_string(top_dim) +
                          " exceeds the complex dimension cap " + std::to_string(K.dim_cap));
    BettiReport rep;
    rep.kind = K.kind;
    rep.epsilon = K.epsilon;
    rep.coeff_field = rational_coeffs ? "rational" : "gf2";

    auto level = [&](int k) -> const std::vector<std::vector<int>>& {
        static const std::vector<std::vector<int>> empty;
        if (k < 0 || k >= static_cast<int>(K.simplices_by_dim.size())) return empty;
        return K.simplices_by_dim[k];
    };

    std::vector<long long> ranks(top_dim + 2, 0);  // ranks[k] = rank d_k
    for (int k = 1; k <= top_dim + 1; ++k) {
        ranks[k] = rational_coeffs ? rational_rank(level(k - 1), level(k))
                                   : gf2_rank(level(k - 1), level(k));
    }
    for (int k = 0; k <= top_dim; ++k) {
        long long nk = static_cast<long long>(level(k).size());
        rep.betti.push_back(nk - ranks[k] - ranks[k + 1]);
    }

    // beta_0 cross-check by union-find on the 1-skeleton
    if (K.num_vertices > 0) {
        UnionFind uf(K.num_vertices);
        for (const auto& e : level(1)) uf.unite(e[0], e[1]);
        if (uf.components() != rep.betti[0])
            throw numeric_error("betti: beta_0 rank-nullity and union-find disagree");
    }
    return rep;
}

BettiReport certify(BettiReport report, double epsilon, double b2_or_wfs, CertifyMode mode,
                    std::optional<double> local_reach_min, bool sample_certified) {
    std::ostringstream ineq;
    report.certificate = Certificate::none;
    if (mode == CertifyMode::wfs) {
        if (report.kind != ComplexKind::modified_vr)
            throw input_error("certify: wfs mode applies to the modified Vietoris-Rips complex");
        ineq << "epsilon " << epsilon << " < wfs " << b2_or_wfs;
        report.inequality_holds = epsilon < b2_or_wfs;
        if (report.inequality_holds) report.certificate = Certificate::wfs_based;
    } else {
        if (report.kind != ComplexKind::cech)
            throw input_error("certify: reach mode applies to the Cech complex");
        if (!local_reach_min)
            throw input_error("certify: reach mode needs the minimum local-reach bound");
        ineq << "epsilon " << epsilon << " < 4/5 * min eta " << (0.8 * *local_reach_min)
             << " and sample certified (epsilon/2)-dense: " << (sample_certified ? "yes" : "no");
        report.inequality_holds = (epsilon < 0.8 * (*local_reach_min)) && sample_certified;
        if (report.inequality_holds) report.certificate = Certificate::reach_based;
    }
    report.inequality = ineq.str();
    return report;
}

std::string complex_to_text(const SimplicialComplex& K) {
    std::ostringstream out;
    out << "kind " << (K.kind == ComplexKind::modified_vr ? "modified_vr" : "cech") << "\n";
    out << "epsilon " << K.epsilon << "\n";
    for (std::size_t k = 0; k < K.simplices_by_dim.size(); ++k) {
        for (const auto& s : K.simplices_by_dim[k]) {
            out << k;
            for (int v : s) out << " " << v;
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace vs
