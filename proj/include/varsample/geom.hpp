#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "varsample/solve.hpp"

namespace vs {

// Critical points on X of the squared distance to a base point q, computed
// from the augmented square system {F(x) = 0, x - q = sum_i lambda_i grad f_i(x)}.
struct NormalLocus {
    Eigen::VectorXd base_point;
    std::vector<Eigen::VectorXd> critical_points;  // real points on X
    int edd_observed = 0;       // converged complex endpoints (deduplicated)
    long long paths_tracked = 0;
};

struct Box {
    Eigen::VectorXd center;
    double half_width = 0.0;

    double width() const { return 2.0 * half_width; }
    bool contains(const Eigen::VectorXd& x) const {
        return ((x - center).lpNorm<Eigen::Infinity>() <= half_width);
    }
};

struct BottleneckPair {
    Eigen::VectorXd x, y;
    double radius = 0.0;   // ||x - y|| / 2
    bool isolated = true;  // square-system Jacobian nonsingular at the endpoint
};

struct BottleneckReport {
    std::vector<BottleneckPair> pairs;
    std::optional<double> b2;            // min radius; unset when finite == false
    bool finite = false;
    std::optional<double> min_pair_distance;  // 2 * b2 when available
    std::optional<double> wfs_declared;
    bool wfs_is_fallback = false;  // wfs_declared taken as b2 (conjectural equality)
    long long paths_tracked = 0;
    std::string diagnosis;
};

// Square (x, lambda)-system for the normal locus of F with respect to q.
PolySystem normal_locus_system(const PolySystem& F, const Eigen::VectorXd& q);

NormalLocus normal_locus(const PolySystem& F, const Eigen::VectorXd& q,
                         const TrackSettings& settings);

// Hypercube centered at a random (or supplied) base point with half-width
// max ||x - q|| over its normal locus, plus a 1% margin.
Box bounding_box(const PolySystem& F, const TrackSettings& settings,
                 std::optional<Eigen::VectorXd> q = std::nullopt);

/**
 * Family of parallel affine slices {x_{t_j} = g_j}: the system is made
 * parametric in the fixed coordinates, solved once at a generic complex
 * parameter point, and every real grid value is reached by a parameter
 * homotopy from that shared start.
 */
class SliceFamily {
  public:
    // fixed: strictly increasing coordinate indices. When with_normal_locus
    // is set, the sliced variety's normal locus system with respect to q is
    // built instead of the bare slice (used by the extra sample).
    SliceFamily(const PolySystem& F, std::vector<int> fixed, const TrackSettings& settings,
                std::optional<Eigen::VectorXd> normal_locus_q = std::nullopt);

    // Real points of X cap pi_t^{-1}(g), embedded back into R^n.
    struct Result {
        std::vector<Eigen::VectorXd> points;
        long long paths = 0;
        bool singular = false;  // some path hit a singular endpoint
    };
    Result at(const Eigen::VectorXd& g) const;

    int start_size() const { return static_cast<int>(start_.points.size()); }
    long long generic_paths() const { return start_.paths_tracked; }
    const std::vector<int>& fixed() const { return fixed_; }

  private:
    const PolySystem& F_;
    std::vector<int> fixed_;
    std::vector<int> free_;
    int num_lambda_ = 0;
    ParametricSystem param_;
    CompiledSystem compiled_;      // the parametric family
    CompiledSystem full_target_;   // original F, for on-variety residual checks
    TrackSettings settings_;
    Eigen::VectorXcd g0_;
    SolutionSet start_;
};

// Single slice of X (square case |t| = dim X).
std::vector<Eigen::VectorXd> slice(const PolySystem& F, const std::vector<int>& t,
                                   const Eigen::VectorXd& g, const TrackSettings& settings);

// The bottleneck system on X x X (degree-2 bottlenecks): defining equations
// at both points plus random real combinations of the (c+1)x(c+1) minors of
// [x - y; J_F] at each point, squared to 2n equations.
PolySystem bottleneck_system(const PolySystem& F, const TrackSettings& settings);

BottleneckReport bottlenecks(const PolySystem& F, const TrackSettings& settings,
                             std::optional<Box> box = std::nullopt,
                             std::optional<double> wfs_override = std::nullopt);

}  // namespace vs
