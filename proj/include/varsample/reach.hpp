#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "varsample/sample.hpp"

namespace vs {

// Splits a system describing a subvariety of the unit sphere into the
// homogeneous forms and the sphere equation sum x_i^2 - 1. Throws
// input_error("unsupported input ...") when the system is not of this
// shape. For the sphere alone the form list is the quadratic form
// sum x_i^2 itself (q = 1).
struct SphereSplit {
    PolySystem forms;   // the mu/eta system
    int sphere_index;   // row of F that is the sphere equation
};
SphereSplit split_on_sphere(const PolySystem& F);

// Condition number ||F|| * ||DF(x)^+ Delta||_spec with
// Delta = diag(sqrt(d_i)); F homogeneous with q <= n rows, x on the unit
// sphere (tolerance 1e-8). Errors on off-sphere points and rank-deficient
// Jacobians.
double mu_norm(const PolySystem& F, const Eigen::VectorXd& x);

// eta as a function of a condition value: 1 / (7 D^{3/2} mu).
double eta_from_mu(double mu, int D);

// Pointwise local-reach lower bound eta(x). Uses the unscaled product
// ||F|| * ||DF(x)^+||_spec; see mu_norm for the degree-scaled condition
// number. This is the variant the reach certificates are calibrated
// against.
double eta(const PolySystem& F, const Eigen::VectorXd& x);

struct ReachEstimate {
    double m = 0.0;            // min eta over the sample
    double epsilon = 0.0;      // density of the sample used
    double lower_bound = 0.0;  // m - epsilon
    int D = 0;
    std::vector<std::pair<Eigen::VectorXd, double>> per_point;
    int iterations = 0;
    bool sample_certified = false;
    Sample sample;
};

// Iterative lower bound on the reach: halve epsilon, sample, take
// m = min eta(e), stop when m - epsilon > 0 (cap 8 halvings).
ReachEstimate reach_lower_bound(const PolySystem& F_full, double epsilon0,
                                const TrackSettings& settings,
                                const TotalSampleOptions& opts = {});

}  // namespace vs
