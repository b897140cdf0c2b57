#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varsample/geom.hpp"
#include "varsample/solve.hpp"

namespace vs {

// Randomly translated axis grids shared by every coordinate projection:
// grid values on axis i are translation[i] + delta * Z, clipped to the box.
struct GridSpec {
    double delta = 0.0;
    Eigen::VectorXd translation;  // components in [0, delta)
    Box box;
    int n = 0;  // ambient dimension
    int d = 0;  // variety dimension

    static GridSpec from_seed(double delta, const Box& box, int n, int d,
                              std::uint64_t seed);
    static GridSpec with_translation(double delta, const Box& box, int n, int d,
                                     const Eigen::VectorXd& translation);

    std::vector<double> axis_values(int axis) const;
};

struct SampleFamily {
    bool extra = false;                    // basic slice vs normal-locus slice
    int k = 0;                             // number of fixed coordinates
    std::vector<int> t;                    // fixed coordinate indices
    std::vector<std::vector<double>> axes; // grid values per fixed coordinate
    long long slices = 0;
    long long paths = 0;                   // parameter-homotopy starts issued
    long long generic_paths = 0;           // one-time total-degree solve
    int start_size = 0;                    // tracked per slice (deg X / EDD)
};

struct PointTag {
    int family = 0;
    long long grid_index = 0;  // row-major over the family axes
};

struct Sample {
    int n = 0;
    std::vector<std::string> var_names;
    std::vector<Eigen::VectorXd> points;
    std::vector<PointTag> tags;
    std::vector<SampleFamily> families;

    double delta = 0.0;
    std::optional<double> epsilon_target;     // requested density
    std::optional<double> epsilon_certified;  // set only when Thm-hypothesis held
    std::uint64_t seed = 0;
    long long paths_tracked = 0;   // parameter-homotopy starts, exact bookkeeping
    long long generic_paths = 0;
    long long basic_count = 0;
    long long extra_count = 0;
    std::optional<double> b2_used;
    std::optional<double> wfs_declared;
    bool wfs_is_fallback = false;

    std::string provenance_string(std::size_t i) const;
    Eigen::VectorXd grid_point(const PointTag& tag) const;
};

// delta = 0.99 * min(epsilon, 2 b2) / sqrt(n); the 0.99 factor keeps the
// strict inequality of the density criterion robust to rounding.
double choose_delta(double epsilon, double b2, int n);

Sample basic_sample(const PolySystem& F, const GridSpec& grid,
                    const TrackSettings& settings);

Sample extra_sample(const PolySystem& F, const GridSpec& grid, const Eigen::VectorXd& q,
                    const TrackSettings& settings);

struct TotalSampleOptions {
    std::optional<double> delta_override;
    std::optional<double> b2_override;
    std::optional<double> wfs_override;
    std::optional<int> dim_override;
    std::optional<Box> box_override;
};

// bounding box -> bottlenecks -> choose_delta -> basic + extra samples.
Sample total_sample(const PolySystem& F, double epsilon, const TrackSettings& settings,
                    const TotalSampleOptions& opts = {});

// union of samples over the same grid/system; deduplicates
Sample merge_samples(Sample a, Sample b);

void write_sample_csv(const Sample& S, std::ostream& out);
void write_sample_obj(const Sample& S, std::ostream& out);

}  // namespace vs
