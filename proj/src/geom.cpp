#include "varsample/geom.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "varsample/rng.hpp"

namespace vs {

namespace {

// doubles are dyadic rationals, so this conversion is exact
Rational exact(double v) { return Rational(v); }

std::uint64_t hash_indices(const std::vector<int>& t, std::uint64_t salt) {
    std::uint64_t h = salt;
    for (int i : t) h = SeedStream::mix(h, static_cast<std::uint64_t>(i) + 17);
    return h;
}

// Smallest singular value of the row-normalized augmented matrix
// [v; J rows]; the rank <= c condition holds when this is ~0.
double normality_sigma(const Eigen::VectorXd& v, const Eigen::MatrixXd& J) {
    Eigen::MatrixXd M(J.rows() + 1, J.cols());
    double vn = v.norm();
    if (vn == 0.0) return 0.0;
    M.row(0) = v.transpose() / vn;
    for (int i = 0; i < J.rows(); ++i) {
        double rn = J.row(i).norm();
        if (rn == 0.0) return 1.0;  // singular point of X: reject upstream
        M.row(i + 1) = J.row(i) / rn;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues().tail(1)(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Normal locus
// ---------------------------------------------------------------------------

PolySystem normal_locus_system(const PolySystem& F, const Eigen::VectorXd& q) {
    const int n = F.num_vars();
    const int c = F.codim();
    if (q.size() != n) throw input_error("normal_locus: base point dimension mismatch");

    const int total = n + c;
    std::vector<int> where(n);
    for (int i = 0; i < n; ++i) where[i] = i;

    std::vector<Polynomial> eqs;
    std::vector<std::string> names = F.var_names();
    for (int j = 0; j < c; ++j) names.push_back("lambda" + std::to_string(j));

    for (const auto& f : F.polys()) eqs.push_back(f.reindex(where, total));

    const auto& jac = F.jacobian_polys();
    for (int j = 0; j < n; ++j) {
        Polynomial e = Polynomial::variable(total, j);
        e.add_term(Exponents(total, 0), -exact(q[j]));
        for (int i = 0; i < c; ++i) {
            Polynomial li = Polynomial::variable(total, n + i);
            e = e - li * jac[i][j].reindex(where, total);
        }
        eqs.push_back(std::move(e));
    }
    return PolySystem(std::move(eqs), std::move(names));
}

NormalLocus normal_locus(const PolySystem& F, const Eigen::VectorXd& q,
                         const TrackSettings& settings) {
    const int n = F.num_vars();
    PolySystem sys = normal_locus_system(F, q);
    SolutionSet S = solve_square(sys, settings);

    NormalLocus out;
    out.base_point = q;
    out.paths_tracked = S.paths_tracked;

    // a path can converge onto a positive-dimensional critical set (q on a
    // symmetry center); such endpoints have a rank-deficient square-system
    // Jacobian and do not count as normal-locus points
    CompiledSystem sysC(sys);
    EvalWorkspace ws;
    std::vector<const Eigen::VectorXcd*> isolated;
    for (const auto& z : S.points) {
        Eigen::MatrixXcd J(sys.size(), sys.num_vars());
        sysC.eval_jacobian(z, J, ws);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
        const auto& sv = svd.singularValues();
        if (sv(0) > 0 && sv(sv.size() - 1) / sv(0) > 1e-8) isolated.push_back(&z);
    }
    out.edd_observed = static_cast<int>(isolated.size());

    if (isolated.empty() &&
        (S.count(PathStatus::singular_endpoint) > 0 || !S.points.empty()))
        throw numeric_error("normal_locus: all paths singular or non-isolated (base point "
                            "is non-generic); resample the base point");

    CompiledSystem FC(F);
    for (const Eigen::VectorXcd* zp : isolated) {
        const Eigen::VectorXcd& z = *zp;
        if (z.imag().lpNorm<Eigen::Infinity>() > settings.real_tol) continue;
        Eigen::VectorXd x = z.real().head(n);
        Eigen::VectorXcd xc = x.cast<std::complex<double>>();
        double scale = std::max(1.0, FC.scale(xc, ws));
        if (FC.residual(xc, ws) > 1e-8 * scale) continue;
        if (normality_sigma(x - q, F.jacobian_real(x)) > 1e-6) continue;
        out.critical_points.push_back(std::move(x));
    }
    std::vector<int> keep = dedup_indices(out.critical_points, settings.dedup_tol);
    std::vector<Eigen::VectorXd> unique;
    unique.reserve(keep.size());
    for (int i : keep) unique.push_back(out.critical_points[i]);
    out.critical_points = std::move(unique);
    return out;
}

Box bounding_box(const PolySystem& F, const TrackSettings& settings,
                 std::optional<Eigen::VectorXd> q_opt) {
    const int n = F.num_vars();
    Eigen::VectorXd q(n);
    if (q_opt) {
        q = *q_opt;
    } else {
        SeedStream rng(settings.rng_seed, rng_tag::box_center);
        for (int i = 0; i < n; ++i) q[i] = rng.uniform(-0.5, 0.5);
    }
    NormalLocus nl = normal_locus(F, q, settings);
    if (nl.critical_points.empty())
        throw numeric_error("bounding_box: empty normal locus (real variety empty or all "
                            "paths failed)");
    double r = 0.0;
    for (const auto& x : nl.critical_points) r = std::max(r, (x - q).norm());
    Box box;
    box.center = q;
    box.half_width = r * 1.01;  // margin against float error at extremal points
    return box;
}

// ---------------------------------------------------------------------------
// Slice families
// ---------------------------------------------------------------------------

SliceFamily::SliceFamily(const PolySystem& F, std::vector<int> fixed,
                         const TrackSettings& settings,
                         std::optional<Eigen::VectorXd> normal_locus_q)
    : F_(F), fixed_(std::move(fixed)), full_target_(F), settings_(settings) {
    const int n = F.num_vars();
    const int c = F.codim();
    const int k = static_cast<int>(fixed_.size());
    for (int i = 0; i < n; ++i)
        if (std::find(fixed_.begin(), fixed_.end(), i) == fixed_.end()) free_.push_back(i);

    const bool with_nl = normal_locus_q.has_value();
    num_lambda_ = with_nl ? c : 0;
    if (!with_nl && static_cast<int>(free_.size()) != c)
        throw input_error("slice: fixing " + std::to_string(k) +
                          " coordinates does not give a square system (need n - |t| = c)");

    const int m = static_cast<int>(free_.size()) + num_lambda_;  // unknowns
    const int total = m + k;
    std::vector<int> where(n, -1);
    for (std::size_t j = 0; j < free_.size(); ++j) where[free_[j]] = static_cast<int>(j);
    for (int j = 0; j < k; ++j) where[fixed_[j]] = m + j;

    std::vector<std::string> names;
    for (int i : free_) names.push_back(F.var_names()[i]);
    for (int j = 0; j < num_lambda_; ++j) names.push_back("lambda" + std::to_string(j));
    for (int i : fixed_) names.push_back(F.var_names()[i] + "_g");

    std::vector<Polynomial> eqs;
    for (const auto& f : F.polys()) eqs.push_back(f.reindex(where, total));
    if (with_nl) {
        const Eigen::VectorXd& q = *normal_locus_q;
        if (q.size() != n) throw input_error("slice family: base point dimension mismatch");
        const auto& jac = F.jacobian_polys();
        for (std::size_t j = 0; j < free_.size(); ++j) {
            int orig = free_[j];
            Polynomial e = Polynomial::variable(total, static_cast<int>(j));
            e.add_term(Exponents(total, 0), -exact(q[orig]));
            for (int i = 0; i < c; ++i) {
                Polynomial li =
                    Polynomial::variable(total, static_cast<int>(free_.size()) + i);
                e = e - li * jac[i][orig].reindex(where, total);
            }
            eqs.push_back(std::move(e));
        }
    }
    param_ = ParametricSystem(PolySystem(std::move(eqs), std::move(names)), m);
    compiled_ = CompiledSystem(param_.full);

    // generic complex start parameters; the imaginary offset keeps the start
    // slice away from the real discriminant
    std::uint64_t tag = hash_indices(fixed_, with_nl ? 0x9e11 : 0x51ce);
    SeedStream rng(settings_.rng_seed, SeedStream::mix(rng_tag::slice_start, tag));
    g0_.resize(k);
    for (int j = 0; j < k; ++j) {
        double re = rng.uniform(-1.2, 1.2);
        double im = (0.3 + 0.7 * rng.unit()) * (rng.next_u64() & 1 ? 1.0 : -1.0);
        g0_[j] = std::complex<double>(re, im);
    }
    start_ = solve_square_pinned(compiled_, m, param_.unknown_degrees(), g0_, settings_);
}

SliceFamily::Result SliceFamily::at(const Eigen::VectorXd& g) const {
    const int n = F_.num_vars();
    const int k = static_cast<int>(fixed_.size());
    if (g.size() != k) throw input_error("slice: grid point dimension mismatch");

    Result res;
    res.paths = start_size();
    if (start_.points.empty()) return res;

    TrackSettings inner = settings_;
    inner.workers = 1;  // outer loops own the parallelism
    SolutionSet ends = parameter_track_compiled(compiled_, param_.num_unknowns, start_.points,
                                                g0_, g.cast<std::complex<double>>(), inner);
    res.singular = ends.count(PathStatus::singular_endpoint) > 0;

    EvalWorkspace ws;
    std::vector<Eigen::VectorXd> reals = real_points(ends, inner.real_tol);
    for (const auto& sol : reals) {
        Eigen::VectorXd x(n);
        for (std::size_t j = 0; j < free_.size(); ++j) x[free_[j]] = sol[j];
        for (int j = 0; j < k; ++j) x[fixed_[j]] = g[j];
        Eigen::VectorXcd xc = x.cast<std::complex<double>>();
        if (full_target_.residual(xc, ws) >
            1e-8 * std::max(1.0, full_target_.scale(xc, ws)))
            continue;
        res.points.push_back(std::move(x));
    }
    return res;
}

std::vector<Eigen::VectorXd> slice(const PolySystem& F, const std::vector<int>& t,
                                   const Eigen::VectorXd& g, const TrackSettings& settings) {
    SliceFamily family(F, t, settings);
    return family.at(g).points;
}

// ---------------------------------------------------------------------------
// Bottlenecks
// ---------------------------------------------------------------------------

namespace {

// Determinant of a square polynomial matrix by Laplace expansion along the
// first row (sizes here are at most c+1 <= n).
Polynomial poly_det(const std::vector<std::vector<Polynomial>>& M, int nvars) {
    const int m = static_cast<int>(M.size());
    if (m == 1) return M[0][0];
    Polynomial acc(nvars);
    for (int j = 0; j < m; ++j) {
        std::vector<std::vector<Polynomial>> sub;
        sub.reserve(m - 1);
        for (int r = 1; r < m; ++r) {
            std::vector<Polynomial> row;
            row.reserve(m - 1);
            for (int cidx = 0; cidx < m; ++cidx)
                if (cidx != j) row.push_back(M[r][cidx]);
            sub.push_back(std::move(row));
        }
        Polynomial term = M[0][j] * poly_det(sub, nvars);
        acc = (j % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

// All (c+1)x(c+1) minors of [v_row; J_block] where the matrix entries live
// in the 2n-variable (x, y) ring.
std::vector<Polynomial> augmented_minors(const std::vector<Polynomial>& v_row,
                                         const std::vector<std::vector<Polynomial>>& jac,
                                         int nvars) {
    const int n = static_cast<int>(v_row.size());
    const int rows = static_cast<int>(jac.size()) + 1;
    std::vector<Polynomial> minors;
    std::vector<int> cols(rows);
    for (int i = 0; i < rows; ++i) cols[i] = i;
    for (;;) {
        std::vector<std::vector<Polynomial>> M(rows);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < rows; ++j) {
                M[i].push_back(i == 0 ? v_row[cols[j]] : jac[i - 1][cols[j]]);
            }
        }
        minors.push_back(poly_det(M, nvars));
        // next column combination
        int i = rows - 1;
        while (i >= 0 && cols[i] == n - rows + i) --i;
        if (i < 0) break;
        ++cols[i];
        for (int j = i + 1; j < rows; ++j) cols[j] = cols[j - 1] + 1;
    }
    return minors;
}

}  // namespace

PolySystem bottleneck_system(const PolySystem& F, const TrackSettings& settings) {
    const int n = F.num_vars();
    const int c = F.codim();
    if (c >= n) throw input_error("bottlenecks: require codim < n");

    const int total = 2 * n;
    std::vector<int> to_x(n), to_y(n);
    for (int i = 0; i < n; ++i) { to_x[i] = i; to_y[i] = n + i; }

    std::vector<std::string> names;
    for (const auto& v : F.var_names()) names.push_back(v);
    for (const auto& v : F.var_names()) names.push_back(v + "_");

    std::vector<Polynomial> eqs;
    for (const auto& f : F.polys()) eqs.push_back(f.reindex(to_x, total));
    for (const auto& f : F.polys()) eqs.push_back(f.reindex(to_y, total));

    // x - y row and the two Jacobian blocks in the doubled ring
    std::vector<Polynomial> diff;
    for (int j = 0; j < n; ++j) {
        Polynomial d = Polynomial::variable(total, j);
        d.add_term([&] { Exponents a(total, 0); a[n + j] = 1; return a; }(), -1);
        diff.push_back(std::move(d));
    }
    const auto& jac = F.jacobian_polys();
    std::vector<std::vector<Polynomial>> jac_x(c), jac_y(c);
    for (int i = 0; i < c; ++i) {
        for (int j = 0; j < n; ++j) {
            jac_x[i].push_back(jac[i][j].reindex(to_x, total));
            jac_y[i].push_back(jac[i][j].reindex(to_y, total));
        }
    }

    std::vector<Polynomial> minors_x = augmented_minors(diff, jac_x, total);
    std::vector<Polynomial> minors_y = augmented_minors(diff, jac_y, total);

    // The rank condition has codimension n-c at each point, so n-c generic
    // real combinations per block square the system to 2n equations.
    SeedStream rng(settings.rng_seed, rng_tag::minor_combos);
    auto combine = [&](const std::vector<Polynomial>& minors) {
        std::vector<Polynomial> out;
        for (int r = 0; r < n - c; ++r) {
            Polynomial acc(total);
            for (const auto& mnr : minors) acc = acc + mnr.scale(exact(rng.uniform(-1.0, 1.0)));
            out.push_back(std::move(acc));
        }
        return out;
    };
    if (minors_x.size() == 1) {
        // already one condition per block (c + 1 = n): use the minor itself
        eqs.push_back(minors_x[0]);
        eqs.push_back(minors_y[0]);
    } else {
        for (auto& e : combine(minors_x)) eqs.push_back(std::move(e));
        for (auto& e : combine(minors_y)) eqs.push_back(std::move(e));
    }
    return PolySystem(std::move(eqs), std::move(names));
}

BottleneckReport bottlenecks(const PolySystem& F, const TrackSettings& settings,
                             std::optional<Box> box_opt, std::optional<double> wfs_override) {
    const int n = F.num_vars();
    const int c = F.codim();
    Box box = box_opt ? *box_opt : bounding_box(F, settings);

    PolySystem sys = bottleneck_system(F, settings);
    SolutionSet S = solve_square(sys, settings);

    BottleneckReport rep;
    rep.paths_tracked = S.paths_tracked;

    const double diag_tol = std::max(1e-4 * box.width(), 10.0 * settings.dedup_tol);
    CompiledSystem FC(F);
    CompiledSystem sysC(sys);
    EvalWorkspace ws;

    struct Candidate {
        Eigen::VectorXd x, y;
        double radius;
        bool isolated;
    };
    std::vector<Candidate> cands;
    std::vector<Eigen::VectorXd> pair_keys;

    for (const auto& z : S.points) {
        if (z.imag().lpNorm<Eigen::Infinity>() > settings.real_tol) continue;
        Eigen::VectorXd x = z.real().head(n), y = z.real().tail(n);
        double dist = (x - y).norm();
        if (dist <= diag_tol) continue;  // diagonal artifact

        Eigen::VectorXcd xc = x.cast<std::complex<double>>();
        Eigen::VectorXcd yc = y.cast<std::complex<double>>();
        if (FC.residual(xc, ws) > 1e-8 * std::max(1.0, FC.scale(xc, ws))) continue;
        if (FC.residual(yc, ws) > 1e-8 * std::max(1.0, FC.scale(yc, ws))) continue;

        // rank conditions at both endpoints
        if (normality_sigma(x - y, F.jacobian_real(x)) > 1e-6) continue;
        if (normality_sigma(x - y, F.jacobian_real(y)) > 1e-6) continue;

        // isolated <=> the square system is regular at the solution
        Eigen::MatrixXcd J(sys.size(), sys.num_vars());
        sysC.eval_jacobian(z, J, ws);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
        double smin = svd.singularValues().tail(1)(0);
        double smax = svd.singularValues()(0);
        bool isolated = smax > 0 && smin / smax > 1e-8;

        // canonical unordered orientation
        bool swap = std::lexicographical_compare(y.data(), y.data() + n, x.data(), x.data() + n);
        Candidate cand{swap ? y : x, swap ? x : y, dist / 2.0, isolated};
        Eigen::VectorXd key(2 * n);
        key << cand.x, cand.y;
        bool dup = false;
        for (const auto& k : pair_keys)
            if ((k - key).norm() <= settings.dedup_tol) { dup = true; break; }
        if (dup) continue;
        pair_keys.push_back(std::move(key));
        cands.push_back(std::move(cand));
    }

    for (const auto& cand : cands)
        rep.pairs.push_back({cand.x, cand.y, cand.radius, cand.isolated});

    bool any_isolated = false, any_nonisolated = false;
    double min_isolated = std::numeric_limits<double>::infinity();
    for (const auto& cand : cands) {
        if (cand.isolated) {
            any_isolated = true;
            min_isolated = std::min(min_isolated, cand.radius);
        } else {
            any_nonisolated = true;
        }
    }

    // radius-cluster rule: many pairs at one radius whose endpoints are not
    // separated indicates a positive-dimensional bottleneck locus
    bool cluster_rule = false;
    if (cands.size() > 50) {
        std::vector<double> radii;
        for (const auto& cand : cands) radii.push_back(cand.radius);
        std::sort(radii.begin(), radii.end());
        int run = 1;
        for (std::size_t i = 1; i < radii.size(); ++i) {
            run = (radii[i] - radii[i - 1] <= 1e-6) ? run + 1 : 1;
            if (run > 50) { cluster_rule = true; break; }
        }
    }

    if (cands.empty()) {
        rep.finite = false;
        rep.diagnosis = "no valid bottleneck pairs found (all paths singular, divergent, or "
                        "on the diagonal); the locus may be infinite";
    } else if (any_nonisolated || cluster_rule) {
        rep.finite = false;
        rep.diagnosis = cluster_rule
                            ? "more than 50 pairs share a radius: positive-dimensional locus"
                            : "non-isolated bottleneck endpoints detected: positive-dimensional "
                              "locus";
    } else {
        rep.finite = any_isolated;
        if (rep.finite) {
            rep.b2 = min_isolated;
            rep.min_pair_distance = 2.0 * min_isolated;
        }
    }

    if (wfs_override) {
        rep.wfs_declared = *wfs_override;
        rep.wfs_is_fallback = false;
    } else if (rep.b2) {
        rep.wfs_declared = rep.b2;  // conjectural wfs = b2 fallback
        rep.wfs_is_fallback = true;
    }
    return rep;
}

}  // namespace vs
