#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "varsample/polynomial.hpp"

namespace vs {

enum class ComplexKind { modified_vr, cech };

struct SimplicialComplex {
    ComplexKind kind = ComplexKind::modified_vr;
    double epsilon = 0.0;
    int num_vertices = 0;
    int dim_cap = 2;
    // simplices_by_dim[k]: sorted list of strictly increasing vertex tuples;
    // level 0 is the vertex list {0,...,num_vertices-1}.
    std::vector<std::vector<std::vector<int>>> simplices_by_dim;

    std::size_t simplex_count() const;
};

/**
 * Modified Vietoris-Rips complex at scale epsilon, capped at dimension 2.
 * Edge between a and b when ||a-b|| <= 2 eps (closed balls meet), or when a
 * witness c has ||a-c|| <= 2 eps and ||b-c|| <= 2 eps while
 * ||a-b|| <= rule_ii_factor * eps. Triangles close over edges. Comparisons
 * within 1e-12 of a threshold are settled in exact rational arithmetic.
 */
SimplicialComplex build_modified_vr(const std::vector<Eigen::VectorXd>& points,
                                    double epsilon,
                                    double rule_ii_factor = 5.656854249492380195206754896838);

/**
 * Cech complex: a simplex per vertex subset whose open epsilon-balls have a
 * common point, i.e. whose minimum enclosing ball has radius < epsilon.
 * Built incrementally from edge adjacency up to max_dim <= 4.
 */
SimplicialComplex build_cech(const std::vector<Eigen::VectorXd>& points, double epsilon,
                             int max_dim);

// Minimum enclosing ball (Welzl move-to-front); exposed for tests.
struct MinBall {
    Eigen::VectorXd center;
    double radius = 0.0;
};
MinBall min_enclosing_ball(const std::vector<Eigen::VectorXd>& points);

enum class Certificate { none, wfs_based, reach_based };
enum class CertifyMode { wfs, reach };

struct BettiReport {
    std::vector<long long> betti;
    ComplexKind kind = ComplexKind::modified_vr;
    double epsilon = 0.0;
    std::string coeff_field = "gf2";
    Certificate certificate = Certificate::none;
    std::string inequality;       // the inequality that was checked
    bool inequality_holds = false;
};

/**
 * Betti numbers beta_0..beta_top_dim from boundary-matrix ranks
 * (rank-nullity, column reduction); GF(2) by default, exact rational
 * elimination behind the flag. beta_0 is cross-checked against union-find
 * on the 1-skeleton.
 */
BettiReport betti(const SimplicialComplex& K, int top_dim, bool rational_coeffs = false);

// Stamps the homology certificate when the cited inequality holds for the
// supplied values; mode wfs pairs with modified_vr, mode reach with cech
// (which additionally needs min eta and an (eps/2)-certified sample).
BettiReport certify(BettiReport report, double epsilon, double b2_or_wfs, CertifyMode mode,
                    std::optional<double> local_reach_min = std::nullopt,
                    bool sample_certified = false);

// Flat text export: one line per simplex, "dim v0 v1 ...".
std::string complex_to_text(const SimplicialComplex& K);

}  // namespace vs
