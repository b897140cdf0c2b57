#pragma once

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "varsample/errors.hpp"

namespace vs {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

double to_double(const Rational& r);

// Exponent multi-index, length num_vars.
using Exponents = std::vector<int>;

struct parse_error : input_error {
    int line, column;
    parse_error(const std::string& msg, int line_, int col_)
        : input_error(msg + " (line " + std::to_string(line_) + ", column " +
                      std::to_string(col_) + ")"),
          line(line_), column(col_) {}
};

/**
 * Multivariate polynomial with exact rational coefficients, stored as a
 * dense exponent map. Zero coefficients are never stored. Immutable in
 * spirit: all operations return new polynomials.
 */
class Polynomial {
  public:
    explicit Polynomial(int num_vars) : num_vars_(num_vars) {}

    static Polynomial constant(int num_vars, const Rational& c);
    static Polynomial variable(int num_vars, int index);

    int num_vars() const { return num_vars_; }
    const std::map<Exponents, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    // Max total degree over stored terms; 0 for the zero polynomial.
    int degree() const;
    bool is_homogeneous() const;

    // Merges c * x^a into the term map, dropping the entry if it cancels.
    void add_term(const Exponents& a, const Rational& c);
    Rational coefficient(const Exponents& a) const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial negate() const;
    Polynomial pow(unsigned e) const;
    Polynomial scale(const Rational& c) const;
    bool operator==(const Polynomial& o) const {
        return num_vars_ == o.num_vars_ && terms_ == o.terms_;
    }

    Polynomial derivative(int var) const;

    // Term-ordered evaluation in complex double arithmetic; deterministic
    // for the canonical (lexicographic) term order.
    std::complex<double> evaluate(const Eigen::VectorXcd& x) const;

    // Homogenization with a fresh variable appended as the last index.
    Polynomial homogenize() const;

    // Substitute x_i <- sum_j M(i,j) y_j (exact arithmetic).
    Polynomial compose_linear(const std::vector<std::vector<Rational>>& M) const;

    // Reindex variables into a larger ring: exponent of old var i moves to
    // slot where[i] of a ring with new_num_vars variables.
    Polynomial reindex(const std::vector<int>& where, int new_num_vars) const;

    // Partial substitution: for each i with values[i] set, substitute the
    // exact constant; remaining variables keep their indices (ring size
    // unchanged; substituted variables simply no longer occur).
    Polynomial substitute(const std::vector<std::optional<Rational>>& values) const;

  private:
    int num_vars_;
    std::map<Exponents, Rational> terms_;  // lexicographic key order
};

/**
 * Ordered system of polynomials sharing one variable ring. The complete
 * intersection convention is codim == number of polynomials. The symbolic
 * Jacobian is computed once on first use and shared across copies.
 */
class PolySystem {
  public:
    PolySystem() = default;
    PolySystem(std::vector<Polynomial> polys, std::vector<std::string> var_names);

    int num_vars() const { return static_cast<int>(var_names_.size()); }
    int codim() const { return static_cast<int>(polys_.size()); }
    int size() const { return static_cast<int>(polys_.size()); }
    const std::vector<Polynomial>& polys() const { return polys_; }
    const Polynomial& poly(int i) const { return polys_[i]; }
    const std::vector<std::string>& var_names() const { return var_names_; }
    std::vector<int> degrees() const;
    int max_degree() const;

    // Product of degrees (Bezout number) as a checked 64-bit count.
    long long bezout_count() const;

    Eigen::VectorXcd evaluate(const Eigen::VectorXcd& x) const;
    Eigen::MatrixXcd jacobian(const Eigen::VectorXcd& x) const;
    Eigen::VectorXd evaluate_real(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian_real(const Eigen::VectorXd& x) const;
    double residual(const Eigen::VectorXd& x) const;  // infinity norm

    // Symbolic gradient rows, cached under a one-time guard; row i holds
    // the partials of poly i.
    const std::vector<std::vector<Polynomial>>& jacobian_polys() const;

  private:
    std::vector<Polynomial> polys_;
    std::vector<std::string> var_names_;
    struct JacobianCache {
        std::once_flag once;
        std::vector<std::vector<Polynomial>> rows;
    };
    std::shared_ptr<JacobianCache> jac_cache_ = std::make_shared<JacobianCache>();
};

/**
 * Parses a newline- or semicolon-separated list of polynomial expressions.
 * Grammar: + - * ^ with parentheses; integer, decimal (0.13 -> 13/100) and
 * integer-fraction (13/100) literals; identifiers as variables; implicit
 * multiplication is rejected. Variable order is lexicographic unless
 * var_order is given (unknown names then raise input_error).
 */
PolySystem parse_system(const std::string& text,
                        std::optional<std::vector<std::string>> var_order = std::nullopt);

// Canonical printer: graded-lex term order (degree descending, then
// lexicographic on exponents descending), explicit '*' and '^'.
std::string print_polynomial(const Polynomial& p, const std::vector<std::string>& names);
std::string print_system(const PolySystem& F);  // ";\n"-joined

// Weil norm of a homogeneous polynomial: sqrt(sum h_a^2 * binom(d, a)^{-1})
// with the sum accumulated in exact rational arithmetic. Throws input_error
// on non-homogeneous input.
double weil_norm(const Polynomial& h);
// System norm: sqrt(sum of squared Weil norms).
double weil_norm(const std::vector<Polynomial>& fs);

}  // namespace vs
