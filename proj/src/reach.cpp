#include "varsample/reach.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "varsample/compiled.hpp"
#include "varsample/parallel.hpp"

namespace vs {

namespace {

// is p == s * (sum x_i^2 - 1) for some nonzero rational s?
bool is_sphere_equation(const Polynomial& p) {
    const int n = p.num_vars();
    if (static_cast<int>(p.term_count()) != n + 1) return false;
    Rational s = -p.coefficient(Exponents(n, 0));
    if (s == 0) return false;
    for (int i = 0; i < n; ++i) {
        Exponents a(n, 0);
        a[i] = 2;
        if (p.coefficient(a) != s) return false;
    }
    return true;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& DF) {
    Eigen::MatrixXd G = DF * DF.transpose();  // q x q Gram
    Eigen::JacobiSVD<Eigen::MatrixXd> gsvd(G);
    const auto& sv = gsvd.singularValues();
    if (sv(sv.size() - 1) <= 1e-20 * std::max(1.0, sv(0)))
        throw numeric_error("mu_norm: rank-deficient Jacobian (singular point of the variety)");
    return DF.transpose() * G.inverse();
}

void check_on_sphere(const Eigen::VectorXd& x) {
    if (std::abs(x.norm() - 1.0) > 1e-8)
        throw input_error("mu_norm: point is not on the unit sphere");
}

double check_homogeneous_system(const PolySystem& F) {
    for (const auto& f : F.polys())
        if (!f.is_homogeneous())
            throw input_error("mu_norm: system is not homogeneous");
    if (F.size() > F.num_vars())
        throw input_error("mu_norm: more equations than variables");
    return weil_norm(F.polys());
}

}  // namespace

SphereSplit split_on_sphere(const PolySystem& F) {
    const int n = F.num_vars();
    int sphere_idx = -1;
    for (int i = 0; i < F.size(); ++i) {
        if (is_sphere_equation(F.poly(i))) { sphere_idx = i; break; }
    }
    if (sphere_idx < 0)
        throw input_error("unsupported input: reach bounds need a subvariety of the unit "
                          "sphere (no equation of the form sum x_i^2 - 1 found)");
    std::vector<Polynomial> forms;
    for (int i = 0; i < F.size(); ++i) {
        if (i == sphere_idx) continue;
        if (!F.poly(i).is_homogeneous())
            throw input_error("unsupported input: all non-sphere equations must be "
                              "homogeneous forms");
        forms.push_back(F.poly(i));
    }
    if (forms.empty()) {
        // the sphere itself: use its quadratic form
        Polynomial s(n);
        for (int i = 0; i < n; ++i) {
            Exponents a(n, 0);
            a[i] = 2;
            s.add_term(a, 1);
        }
        forms.push_back(std::move(s));
    }
    return {PolySystem(std::move(forms), F.var_names()), sphere_idx};
}

double mu_norm(const PolySystem& F, const Eigen::VectorXd& x) {
    double normF = check_homogeneous_system(F);
    check_on_sphere(x);
    Eigen::MatrixXd DF = F.jacobian_real(x);
    Eigen::MatrixXd M = pseudo_inverse(DF);
    for (int j = 0; j < F.size(); ++j)
        M.col(j) *= std::sqrt(static_cast<double>(F.poly(j).degree()));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return normF * svd.singularValues()(0);
}

double eta_from_mu(double mu, int D) {
    return 1.0 / (7.0 * std::pow(static_cast<double>(D), 1.5) * mu);
}

double eta(const PolySystem& F, const Eigen::VectorXd& x) {
    double normF = check_homogeneous_system(F);
    check_on_sphere(x);
    Eigen::MatrixXd M = pseudo_inverse(F.jacobian_real(x));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return eta_from_mu(normF * svd.singularValues()(0), F.max_degree());
}

ReachEstimate reach_lower_bound(const PolySystem& F_full, double epsilon0,
                                const TrackSettings& settings,
                                const TotalSampleOptions& opts) {
    if (epsilon0 <= 0) throw input_error("reach_lower_bound: epsilon0 must be positive");
    SphereSplit split = split_on_sphere(F_full);
    const double normF = check_homogeneous_system(split.forms);
    const int D = split.forms.max_degree();
    const int q = split.forms.size();

    CompiledSystem forms(split.forms);

    ReachEstimate est;
    est.D = D;
    double eps = 2.0 * epsilon0;
    bool have_sample = false;
    const int max_halvings = 8;

    for (int it = 0; it < max_halvings; ++it) {
        eps /= 2.0;
        est.iterations = it + 1;
        // with a fixed delta override the sample does not depend on eps, so
        // the first one is reused across halvings
        if (!have_sample || !opts.delta_override) {
            est.sample = total_sample(F_full, eps, settings, opts);
            have_sample = true;

            est.per_point.assign(est.sample.points.size(), {});
            parallel_for(est.sample.points.size(), settings.workers, [&](std::size_t i) {
                thread_local EvalWorkspace ws;
                Eigen::VectorXd e = est.sample.points[i];
                double nrm = e.norm();
                if (std::abs(nrm - 1.0) > 1e-8)
                    throw numeric_error("reach_lower_bound: sample point off the sphere");
                e /= nrm;  // renormalize solver error away
                Eigen::MatrixXcd Jc(q, e.size());
                forms.eval_jacobian(e.cast<std::complex<double>>(), Jc, ws);
                Eigen::MatrixXd DF = Jc.real();
                Eigen::MatrixXd M = pseudo_inverse(DF);
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
                est.per_point[i] = {std::move(e), eta_from_mu(normF * svd.singularValues()(0), D)};
            });
        }
        if (est.per_point.empty())
            throw numeric_error("reach_lower_bound: empty sample");

        double m = est.per_point[0].second;
        for (const auto& [e, h] : est.per_point) m = std::min(m, h);
        est.m = m;
        est.epsilon = eps;
        est.lower_bound = m - eps;
        est.sample_certified = est.sample.epsilon_certified.has_value();
        if (est.lower_bound > 0.0) return est;
    }
    throw numeric_error("reach_lower_bound: iteration cap reached (eta scale far below "
                        "epsilon0); lower bound still nonpositive");
}

}  // namespace vs
