#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "varsample/polynomial.hpp"

namespace vs {

// Flattened double-precision form of an exact polynomial, evaluated with
// per-variable power tables. This is the hot path of the tracker; the exact
// representation is the source of truth.
struct CompiledPoly {
    int num_vars = 0;
    std::vector<std::complex<double>> coeffs;
    std::vector<int> exps;  // nterms * num_vars, row-major

    static CompiledPoly from(const Polynomial& p);

    std::complex<double> eval(const std::vector<std::vector<std::complex<double>>>& pow) const {
        std::complex<double> acc(0.0, 0.0);
        const int* e = exps.data();
        for (std::size_t t = 0; t < coeffs.size(); ++t, e += num_vars) {
            std::complex<double> term = coeffs[t];
            for (int i = 0; i < num_vars; ++i)
                if (e[i]) term *= pow[i][e[i]];
            acc += term;
        }
        return acc;
    }
};

// Scratch space reused across evaluations on one thread.
struct EvalWorkspace {
    std::vector<std::vector<std::complex<double>>> pow;

    void fill(const Eigen::VectorXcd& x, const std::vector<int>& max_deg) {
        if (pow.size() != static_cast<std::size_t>(x.size())) pow.resize(x.size());
        for (int i = 0; i < x.size(); ++i) {
            auto& pi = pow[i];
            if (pi.size() < static_cast<std::size_t>(max_deg[i]) + 1)
                pi.resize(max_deg[i] + 1);
            pi[0] = {1.0, 0.0};
            for (int k = 1; k <= max_deg[i]; ++k) pi[k] = pi[k - 1] * x[i];
        }
    }
};

// A polynomial system together with its compiled Jacobian.
class CompiledSystem {
  public:
    CompiledSystem() = default;
    explicit CompiledSystem(const PolySystem& F);

    int num_vars() const { return num_vars_; }
    int num_polys() const { return static_cast<int>(values_.size()); }
    const std::vector<int>& degrees() const { return degrees_; }

    void eval(const Eigen::VectorXcd& x, Eigen::VectorXcd& out, EvalWorkspace& ws) const;
    // J is num_polys x num_vars.
    void eval_jacobian(const Eigen::VectorXcd& x, Eigen::MatrixXcd& J, EvalWorkspace& ws) const;

    double residual(const Eigen::VectorXcd& x, EvalWorkspace& ws) const;

    // Magnitude max_i sum_t |c_t| prod |x_j|^{e_j}: the roundoff scale of a
    // double evaluation, used to normalize residual thresholds.
    double scale(const Eigen::VectorXcd& x, EvalWorkspace& ws) const;

  private:
    int num_vars_ = 0;
    std::vector<CompiledPoly> values_;
    std::vector<CompiledPoly> jac_;  // row-major num_polys x num_vars
    std::vector<int> degrees_;
    std::vector<int> max_deg_;
};

}  // namespace vs
