#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "varsample/compiled.hpp"
#include "varsample/polynomial.hpp"

namespace vs {

struct TrackSettings {
    double step_init = 0.05;
    double step_min = 1e-7;
    double step_max = 0.1;
    double newton_tol = 1e-10;
    int max_newton_iters = 3;
    double endgame_t = 0.1;       // in (0, 0.2]
    double real_tol = 1e-8;
    double dedup_tol = 1e-6;
    int max_steps = 20000;
    std::uint64_t rng_seed = 0;
    long long max_paths = 2'000'000;
    int workers = 1;

    void validate() const;
};

enum class PathStatus { converged, diverged, singular_endpoint, truncated };

struct SolutionSet {
    // Deduplicated converged endpoints, canonical (start-index) order.
    std::vector<Eigen::VectorXcd> points;
    std::vector<double> residuals;      // infinity norm of the target system
    std::vector<int> multiplicity;      // paths that landed on each point
    std::vector<PathStatus> path_status;  // per tracked path, start order
    long long paths_tracked = 0;

    int count(PathStatus s) const;
};

// System with designated parameter slots: the underlying ring is
// (unknowns..., parameters...) and tracking happens in the unknowns while
// parameters move along a line segment.
struct ParametricSystem {
    PolySystem full;
    int num_unknowns = 0;
    int num_params = 0;

    ParametricSystem() = default;
    ParametricSystem(PolySystem sys, int unknowns)
        : full(std::move(sys)), num_unknowns(unknowns),
          num_params(full.num_vars() - unknowns) {}

    // Structural total degree in the unknown block, per polynomial.
    std::vector<int> unknown_degrees() const;
};

/**
 * Solves a square system by a total-degree homotopy from
 * {x_i^{d_i} - 1 = 0} along H(x,t) = (1-t)*gamma*G(x) + t*F(x) with a
 * seeded random unit-complex gamma. Tracks prod(d_i) paths; converged
 * endpoints are Newton-polished and deduplicated.
 */
SolutionSet solve_square(const PolySystem& F, const TrackSettings& settings);

/**
 * Parameter homotopy: tracks each start point along
 * p(t) = (1-t)*p0 + t*p1. start must solve F(.; p0) to tolerance.
 */
SolutionSet parameter_track(const ParametricSystem& F, const SolutionSet& start,
                            const Eigen::VectorXcd& p0, const Eigen::VectorXcd& p1,
                            const TrackSettings& settings);

// Same engine against a pre-compiled parametric system; start residuals are
// assumed already checked at the family level.
SolutionSet parameter_track_compiled(const CompiledSystem& full, int num_unknowns,
                                     const std::vector<Eigen::VectorXcd>& starts,
                                     const Eigen::VectorXcd& p0, const Eigen::VectorXcd& p1,
                                     const TrackSettings& settings);

// Total-degree solve of a parametric system pinned at (generic complex)
// parameter values p. unknown_degrees are the structural degrees in the
// unknown block, which set both the start system and the path count.
SolutionSet solve_square_pinned(const CompiledSystem& full, int num_unknowns,
                                const std::vector<int>& unknown_degrees,
                                const Eigen::VectorXcd& p, const TrackSettings& settings);

// Keeps converged points whose imaginary parts are all within real_tol,
// returns deduplicated real parts.
std::vector<Eigen::VectorXd> real_points(const SolutionSet& S, double real_tol);

// Newton-polish a point against a square system at fixed parameters;
// returns the refined point and its residual.
struct PolishResult {
    Eigen::VectorXcd x;
    double residual;
    bool converged;
    double last_step;
};
PolishResult newton_polish(const CompiledSystem& F, const Eigen::VectorXcd& x0,
                           const TrackSettings& settings, int iters = 0);

// Shared helper: greedy dedup by Euclidean distance, keeping first
// occurrences (stable under the input order).
template <typename Vec>
std::vector<int> dedup_indices(const std::vector<Vec>& pts, double tol) {
    std::vector<int> keep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dup = false;
        for (int j : keep) {
            if ((pts[i] - pts[j]).norm() <= tol) { dup = true; break; }
        }
        if (!dup) keep.push_back(static_cast<int>(i));
    }
    return keep;
}

}  // namespace vs
