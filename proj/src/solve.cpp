#include "varsample/solve.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>

#include "varsample/parallel.hpp"
#include "varsample/rng.hpp"

namespace vs {

// ---------------------------------------------------------------------------
// Compiled systems
// ---------------------------------------------------------------------------

CompiledPoly CompiledPoly::from(const Polynomial& p) {
    CompiledPoly c;
    c.num_vars = p.num_vars();
    for (const auto& [a, coeff] : p.terms()) {
        c.coeffs.emplace_back(to_double(coeff), 0.0);
        c.exps.insert(c.exps.end(), a.begin(), a.end());
    }
    return c;
}

CompiledSystem::CompiledSystem(const PolySystem& F) {
    num_vars_ = F.num_vars();
    degrees_ = F.degrees();
    max_deg_.assign(num_vars_, 0);
    auto track_deg = [&](const Polynomial& p) {
        for (const auto& [a, c] : p.terms())
            for (int i = 0; i < num_vars_; ++i) max_deg_[i] = std::max(max_deg_[i], a[i]);
    };
    for (const auto& p : F.polys()) {
        values_.push_back(CompiledPoly::from(p));
        track_deg(p);
    }
    for (const auto& row : F.jacobian_polys()) {
        for (const auto& dp : row) {
            jac_.push_back(CompiledPoly::from(dp));
            track_deg(dp);
        }
    }
}

void CompiledSystem::eval(const Eigen::VectorXcd& x, Eigen::VectorXcd& out,
                          EvalWorkspace& ws) const {
    ws.fill(x, max_deg_);
    out.resize(num_polys());
    for (int i = 0; i < num_polys(); ++i) out[i] = values_[i].eval(ws.pow);
}

void CompiledSystem::eval_jacobian(const Eigen::VectorXcd& x, Eigen::MatrixXcd& J,
                                   EvalWorkspace& ws) const {
    ws.fill(x, max_deg_);
    J.resize(num_polys(), num_vars_);
    for (int i = 0; i < num_polys(); ++i)
        for (int j = 0; j < num_vars_; ++j) J(i, j) = jac_[i * num_vars_ + j].eval(ws.pow);
}

double CompiledSystem::residual(const Eigen::VectorXcd& x, EvalWorkspace& ws) const {
    ws.fill(x, max_deg_);
    double r = 0.0;
    for (const auto& p : values_) r = std::max(r, std::abs(p.eval(ws.pow)));
    return r;
}

double CompiledSystem::scale(const Eigen::VectorXcd& x, EvalWorkspace& ws) const {
    Eigen::VectorXcd xa(x.size());
    for (int i = 0; i < x.size(); ++i) xa[i] = std::abs(x[i]);
    ws.fill(xa, max_deg_);
    double m = 0.0;
    for (const auto& p : values_) {
        double acc = 0.0;
        const int* e = p.exps.data();
        for (std::size_t t = 0; t < p.coeffs.size(); ++t, e += p.num_vars) {
            double term = std::abs(p.coeffs[t].real());
            for (int i = 0; i < p.num_vars; ++i)
                if (e[i]) term *= ws.pow[i][e[i]].real();
            acc += term;
        }
        m = std::max(m, acc);
    }
    return m;
}

void TrackSettings::validate() const {
    if (!(step_min <= step_init && step_init <= step_max))
        throw input_error("TrackSettings: require step_min <= step_init <= step_max");
    if (newton_tol <= 0 || real_tol <= 0 || dedup_tol <= 0 || step_min <= 0)
        throw input_error("TrackSettings: tolerances must be positive");
    if (!(endgame_t > 0 && endgame_t <= 0.2))
        throw input_error("TrackSettings: endgame_t must lie in (0, 0.2]");
    if (max_newton_iters < 1 || max_steps < 1 || workers < 1)
        throw input_error("TrackSettings: iteration counts must be positive");
}

int SolutionSet::count(PathStatus s) const {
    int n = 0;
    for (auto st : path_status) n += (st == s);
    return n;
}

// ---------------------------------------------------------------------------
// Homotopies
// ---------------------------------------------------------------------------

namespace {

using cd = std::complex<double>;

class Homotopy {
  public:
    virtual ~Homotopy() = default;
    // per-thread copy; implementations carry mutable evaluation scratch
    virtual std::unique_ptr<Homotopy> clone() const = 0;
    virtual int dim() const = 0;
    virtual void eval_H(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& out,
                        EvalWorkspace& ws) const = 0;
    virtual void eval_Jx(const Eigen::VectorXcd& x, double t, Eigen::MatrixXcd& J,
                         EvalWorkspace& ws) const = 0;
    virtual void eval_Ht(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& out,
                         EvalWorkspace& ws) const = 0;
    // Residual and roundoff scale of the target system at t=1.
    virtual double target_residual(const Eigen::VectorXcd& x, EvalWorkspace& ws) const = 0;
    virtual double target_scale(const Eigen::VectorXcd& x, EvalWorkspace& ws) const = 0;
};

// H(x,t) = (1-t)*gamma*(x_i^{d_i} - 1) + t*F(x)
class TotalDegreeHomotopy final : public Homotopy {
  public:
    TotalDegreeHomotopy(const CompiledSystem& F, cd gamma)
        : F_(F), gamma_(gamma), d_(F.degrees()) {}

    std::unique_ptr<Homotopy> clone() const override {
        return std::make_unique<TotalDegreeHomotopy>(*this);
    }
    int dim() const override { return F_.num_vars(); }

    void eval_H(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& out,
                EvalWorkspace& ws) const override {
        F_.eval(x, out, ws);
        for (int i = 0; i < dim(); ++i) {
            cd g = std::pow(x[i], d_[i]) - 1.0;
            out[i] = (1.0 - t) * gamma_ * g + t * out[i];
        }
    }

    void eval_Jx(const Eigen::VectorXcd& x, double t, Eigen::MatrixXcd& J,
                 EvalWorkspace& ws) const override {
        F_.eval_jacobian(x, J, ws);
        J *= t;
        for (int i = 0; i < dim(); ++i)
            J(i, i) += (1.0 - t) * gamma_ * static_cast<double>(d_[i]) *
                       std::pow(x[i], d_[i] - 1);
    }

    void eval_Ht(const Eigen::VectorXcd& x, double /*t*/, Eigen::VectorXcd& out,
                 EvalWorkspace& ws) const override {
        F_.eval(x, out, ws);
        for (int i = 0; i < dim(); ++i) out[i] -= gamma_ * (std::pow(x[i], d_[i]) - 1.0);
    }

    double target_residual(const Eigen::VectorXcd& x, EvalWorkspace& ws) const override {
        return F_.residual(x, ws);
    }
    double target_scale(const Eigen::VectorXcd& x, EvalWorkspace& ws) const override {
        return F_.scale(x, ws);
    }

  private:
    const CompiledSystem& F_;
    cd gamma_;
    std::vector<int> d_;
};

// H(x,t) = (1-t)*gamma*(x_i^{d_i} - 1) + t*F(x; p) with pinned parameters p.
class PinnedTotalDegreeHomotopy final : public Homotopy {
  public:
    PinnedTotalDegreeHomotopy(const CompiledSystem& full, int num_unknowns,
                              std::vector<int> degrees, const Eigen::VectorXcd& p, cd gamma)
        : full_(full), m_(num_unknowns), d_(std::move(degrees)), gamma_(gamma),
          z_(full.num_vars()) {
        z_.tail(p.size()) = p;
    }

    std::unique_ptr<Homotopy> clone() const override {
        return std::make_unique<PinnedTotalDegreeHomotopy>(*this);
    }
    int dim() const override { return m_; }

    void eval_H(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& out,
                EvalWorkspace& ws) const override {
        z_.head(m_) = x;
        full_.eval(z_, out, ws);
        for (int i = 0; i < m_; ++i)
            out[i] = (1.0 - t) * gamma_ * (std::pow(x[i], d_[i]) - 1.0) + t * out[i];
    }

    void eval_Jx(const Eigen::VectorXcd& x, double t, Eigen::MatrixXcd& J,
                 EvalWorkspace& ws) const override {
        z_.head(m_) = x;
        full_.eval_jacobian(z_, Jfull_, ws);
        J = t * Jfull_.leftCols(m_);
        for (int i = 0; i < m_; ++i)
            J(i, i) += (1.0 - t) * gamma_ * static_cast<double>(d_[i]) *
                       std::pow(x[i], d_[i] - 1);
    }

    void eval_Ht(const Eigen::VectorXcd& x, double /*t*/, Eigen::VectorXcd& out,
                 EvalWorkspace& ws) const override {
        z_.head(m_) = x;
        full_.eval(z_, out, ws);
        for (int i = 0; i < m_; ++i) out[i] -= gamma_ * (std::pow(x[i], d_[i]) - 1.0);
    }

    double target_residual(const Eigen::VectorXcd& x, EvalWorkspace& ws) const override {
        z_.head(m_) = x;
        return full_.residual(z_, ws);
    }
    double target_scale(const Eigen::VectorXcd& x, EvalWorkspace& ws) const override {
        z_.head(m_) = x;
        return full_.scale(z_, ws);
    }

  private:
    const CompiledSystem& full_;
    int m_;
    std::vector<int> d_;
    cd gamma_;
    mutable Eigen::VectorXcd z_;
    mutable Eigen::MatrixXcd Jfull_;
};

// H(x,t) = F(x; (1-t) p0 + t p1)
class ParameterHomotopy final : public Homotopy {
  public:
    ParameterHomotopy(const CompiledSystem& full, int num_unknowns,
                      const Eigen::VectorXcd& p0, const Eigen::VectorXcd& p1)
        : full_(full), m_(num_unknowns), p0_(p0), p1_(p1),
          dp_(p1 - p0), z_(full.num_vars()) {}

    std::unique_ptr<Homotopy> clone() const override {
        return std::make_unique<ParameterHomotopy>(*this);
    }
    int dim() const override { return m_; }

    void set_point(const Eigen::VectorXcd& x, double t) const {
        z_.head(m_) = x;
        z_.tail(dp_.size()) = (1.0 - t) * p0_ + t * p1_;
    }

    void eval_H(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& out,
                EvalWorkspace& ws) const override {
        set_point(x, t);
        full_.eval(z_, out, ws);
    }

    void eval_Jx(const Eigen::VectorXcd& x, double t, Eigen::MatrixXcd& J,
                 EvalWorkspace& ws) const override {
        set_point(x, t);
        full_.eval_jacobian(z_, Jfull_, ws);
        J = Jfull_.leftCols(m_);
    }

    void eval_Ht(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& out,
                 EvalWorkspace& ws) const override {
        set_point(x, t);
        full_.eval_jacobian(z_, Jfull_, ws);
        out = Jfull_.rightCols(dp_.size()) * dp_;
    }

    double target_residual(const Eigen::VectorXcd& x, EvalWorkspace& ws) const override {
        set_point(x, 1.0);
        return full_.residual(z_, ws);
    }
    double target_scale(const Eigen::VectorXcd& x, EvalWorkspace& ws) const override {
        set_point(x, 1.0);
        return full_.scale(z_, ws);
    }

  private:
    const CompiledSystem& full_;
    int m_;
    Eigen::VectorXcd p0_, p1_, dp_;
    mutable Eigen::VectorXcd z_;
    mutable Eigen::MatrixXcd Jfull_;
};

constexpr double kDivergenceCutoff = 1e8;

struct PathOutcome {
    Eigen::VectorXcd x;
    PathStatus status = PathStatus::truncated;
    double residual = std::numeric_limits<double>::infinity();
};

// One predictor-corrector tracker; holds all scratch so a path allocates
// nothing after warmup. RK4 on the Davidenko ODE, full Newton corrector,
// step halving on corrector failure, doubling after 5 successes.
class PathTracker {
  public:
    PathTracker(const Homotopy& H, const TrackSettings& s) : H_(H), s_(s), n_(H.dim()) {
        J_.resize(n_, n_);
        for (auto* v : {&Hval_, &dx_, &k1_, &k2_, &k3_, &k4_, &xs_}) v->resize(n_);
    }

    PathOutcome track(const Eigen::VectorXcd& x0) {
        Eigen::VectorXcd x = x0;
        double t = 0.0, h = s_.step_init;
        int successes = 0;
        PathOutcome out;
        for (int step = 0; step < s_.max_steps; ++step) {
            if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > kDivergenceCutoff) {
                out.x = x;
                out.status = PathStatus::diverged;
                return out;
            }
            if (t >= 1.0 - 1e-14) break;
            h = std::min(h, 1.0 - t);

            bool ok = predict_correct(x, t, h);
            if (ok) {
                t += h;
                if (++successes >= 5) {
                    h = std::min(h * 2.0, s_.step_max);
                    successes = 0;
                }
            } else {
                successes = 0;
                h *= 0.5;
                if (h < s_.step_min) {
                    out.x = x;
                    // step collapse near the end of the path marks a singular
                    // endpoint; elsewhere the path is just stuck
                    out.status = (t > 1.0 - s_.endgame_t) ? PathStatus::singular_endpoint
                                                          : PathStatus::truncated;
                    return out;
                }
            }
        }
        if (t < 1.0 - 1e-14) {
            out.x = x;
            out.status = PathStatus::truncated;
            return out;
        }
        // final polish at t = 1
        bool polished = newton(x, 1.0, 2 * s_.max_newton_iters);
        out.x = x;
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > kDivergenceCutoff) {
            out.status = PathStatus::diverged;
            return out;
        }
        out.residual = H_.target_residual(x, ws_);
        double scale = std::max(1.0, H_.target_scale(x, ws_));
        if (polished && out.residual <= 10.0 * s_.newton_tol * scale) {
            out.status = PathStatus::converged;
        } else {
            out.status = PathStatus::singular_endpoint;
        }
        return out;
    }

    // Newton iteration at fixed t; returns true when the last step was
    // below newton_tol (scaled by the point size). total_move accumulates
    // the corrector displacement for the branch-hop guard.
    bool newton(Eigen::VectorXcd& x, double t, int iters, double* total_move = nullptr) {
        for (int it = 0; it < iters; ++it) {
            H_.eval_H(x, t, Hval_, ws_);
            H_.eval_Jx(x, t, J_, ws_);
            lu_.compute(J_);
            dx_ = lu_.solve(-Hval_);
            if (!dx_.allFinite()) return false;
            x += dx_;
            if (total_move) *total_move += dx_.norm();
            double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
            if (dx_.lpNorm<Eigen::Infinity>() <= s_.newton_tol * scale) return true;
        }
        return false;
    }

  private:
    bool davidenko(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& k) {
        H_.eval_Jx(x, t, J_, ws_);
        H_.eval_Ht(x, t, Hval_, ws_);
        lu_.compute(J_);
        k = lu_.solve(-Hval_);
        return k.allFinite();
    }

    bool predict_correct(Eigen::VectorXcd& x, double t, double h) {
        if (!davidenko(x, t, k1_)) return false;
        xs_ = x + (0.5 * h) * k1_;
        if (!davidenko(xs_, t + 0.5 * h, k2_)) return false;
        xs_ = x + (0.5 * h) * k2_;
        if (!davidenko(xs_, t + 0.5 * h, k3_)) return false;
        xs_ = x + h * k3_;
        if (!davidenko(xs_, t + h, k4_)) return false;
        xs_ = x + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
        if (!xs_.allFinite()) return false;
        double predictor_move = (xs_ - x).norm();
        double corrector_move = 0.0;
        if (!newton(xs_, t + h, s_.max_newton_iters, &corrector_move)) return false;
        // a correction comparable to the prediction step indicates a hop to
        // a neighboring path; reject and retry with a smaller step
        if (corrector_move > 0.5 * predictor_move + 1e-5 * (1.0 + x.lpNorm<Eigen::Infinity>()))
            return false;
        x = xs_;
        return true;
    }

    const Homotopy& H_;
    const TrackSettings& s_;
    int n_;
    EvalWorkspace ws_;
    Eigen::MatrixXcd J_;
    Eigen::VectorXcd Hval_, dx_, k1_, k2_, k3_, k4_, xs_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

// Tracks all start points (factory builds one tracker per worker thread)
// and assembles the deduplicated SolutionSet in start order.
SolutionSet run_paths(const Homotopy& H, const std::vector<Eigen::VectorXcd>& starts,
                      const TrackSettings& s) {
    std::vector<PathOutcome> outcomes(starts.size());
    int workers = std::max(1, s.workers);
    if (workers == 1 || starts.size() <= 1) {
        PathTracker tracker(H, s);
        for (std::size_t i = 0; i < starts.size(); ++i) outcomes[i] = tracker.track(starts[i]);
    } else {
        // contiguous chunks, one tracker per chunk; slot-indexed writes keep
        // the result independent of scheduling
        std::size_t n = starts.size();
        std::size_t nchunks = std::min<std::size_t>(n, static_cast<std::size_t>(workers) * 8);
        std::size_t chunk = (n + nchunks - 1) / nchunks;
        parallel_for(nchunks, workers, [&](std::size_t ci) {
            std::unique_ptr<Homotopy> local = H.clone();
            PathTracker tracker(*local, s);
            std::size_t lo = ci * chunk, hi = std::min(n, lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) outcomes[i] = tracker.track(starts[i]);
        });
    }

    SolutionSet out;
    out.paths_tracked = static_cast<long long>(starts.size());
    out.path_status.reserve(starts.size());
    for (const auto& o : outcomes) out.path_status.push_back(o.status);

    std::vector<Eigen::VectorXcd> conv;
    std::vector<double> resid;
    for (const auto& o : outcomes) {
        if (o.status == PathStatus::converged) {
            conv.push_back(o.x);
            resid.push_back(o.residual);
        }
    }
    std::vector<int> keep = dedup_indices(conv, s.dedup_tol);
    std::vector<int> owner(conv.size(), -1);
    for (std::size_t i = 0; i < conv.size(); ++i) {
        for (std::size_t k = 0; k < keep.size(); ++k) {
            if ((conv[i] - conv[keep[k]]).norm() <= s.dedup_tol) {
                owner[i] = static_cast<int>(k);
                break;
            }
        }
    }
    out.points.reserve(keep.size());
    out.residuals.assign(keep.size(), 0.0);
    out.multiplicity.assign(keep.size(), 0);
    for (int idx : keep) out.points.push_back(conv[idx]);
    for (std::size_t k = 0; k < keep.size(); ++k) out.residuals[k] = resid[keep[k]];
    for (std::size_t i = 0; i < conv.size(); ++i)
        if (owner[i] >= 0) out.multiplicity[owner[i]] += 1;
    return out;
}

// Roots-of-unity start points of {x_i^{d_i} = 1}, mixed-radix order.
std::vector<Eigen::VectorXcd> total_degree_starts(const std::vector<int>& d) {
    const int n = static_cast<int>(d.size());
    long long paths = 1;
    for (int di : d) paths *= di;
    std::vector<Eigen::VectorXcd> starts;
    starts.reserve(static_cast<std::size_t>(paths));
    std::vector<int> digits(n, 0);
    const double two_pi = 6.283185307179586476925286766559;
    for (long long p = 0; p < paths; ++p) {
        Eigen::VectorXcd x0(n);
        for (int i = 0; i < n; ++i) {
            double theta = two_pi * digits[i] / d[i];
            x0[i] = std::complex<double>(std::cos(theta), std::sin(theta));
        }
        starts.push_back(std::move(x0));
        for (int i = 0; i < n; ++i) {
            if (++digits[i] < d[i]) break;
            digits[i] = 0;
        }
    }
    return starts;
}

void check_path_budget(const std::vector<int>& d, long long max_paths) {
    long long n = 1;
    for (int di : d) {
        int dd = std::max(1, di);
        if (n > max_paths / dd + 1) { n = max_paths + 1; break; }
        n *= dd;
    }
    if (n > max_paths)
        throw numeric_error("path_budget_exceeded: total-degree count exceeds max_paths " +
                            std::to_string(max_paths));
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

SolutionSet solve_square(const PolySystem& F, const TrackSettings& settings) {
    settings.validate();
    if (F.codim() != F.num_vars())
        throw input_error("solve_square: system must be square (c = n)");
    for (int d : F.degrees())
        if (d < 1) throw input_error("solve_square: constant polynomial in square system");
    check_path_budget(F.degrees(), settings.max_paths);

    CompiledSystem compiled(F);
    SeedStream rng(settings.rng_seed, rng_tag::gamma_trick);
    std::complex<double> gamma = rng.unit_complex();
    TotalDegreeHomotopy H(compiled, gamma);
    return run_paths(H, total_degree_starts(F.degrees()), settings);
}

SolutionSet solve_square_pinned(const CompiledSystem& full, int num_unknowns,
                                const std::vector<int>& unknown_degrees,
                                const Eigen::VectorXcd& p, const TrackSettings& settings) {
    settings.validate();
    if (full.num_polys() != num_unknowns)
        throw input_error("solve_square_pinned: system must be square in the unknowns");
    for (int d : unknown_degrees)
        if (d < 1)
            throw input_error("solve_square_pinned: degree-0 equation after substitution");
    check_path_budget(unknown_degrees, settings.max_paths);

    SeedStream rng(settings.rng_seed, rng_tag::gamma_trick);
    std::complex<double> gamma = rng.unit_complex();
    PinnedTotalDegreeHomotopy H(full, num_unknowns, unknown_degrees, p, gamma);
    return run_paths(H, total_degree_starts(unknown_degrees), settings);
}

std::vector<int> ParametricSystem::unknown_degrees() const {
    std::vector<int> degs;
    for (const auto& p : full.polys()) {
        int d = 0;
        for (const auto& [a, c] : p.terms()) {
            int s = 0;
            for (int i = 0; i < num_unknowns; ++i) s += a[i];
            d = std::max(d, s);
        }
        degs.push_back(d);
    }
    return degs;
}

SolutionSet parameter_track(const ParametricSystem& F, const SolutionSet& start,
                            const Eigen::VectorXcd& p0, const Eigen::VectorXcd& p1,
                            const TrackSettings& settings) {
    settings.validate();
    if (F.full.size() != F.num_unknowns)
        throw input_error("parameter_track: system must be square in the unknowns");
    if (p0.size() != F.num_params || p1.size() != F.num_params)
        throw input_error("parameter_track: parameter dimension mismatch");

    CompiledSystem compiled(F.full);

    EvalWorkspace ws;
    Eigen::VectorXcd z(F.full.num_vars());
    for (const auto& x : start.points) {
        if (x.size() != F.num_unknowns)
            throw input_error("parameter_track: start point dimension mismatch");
        z.head(F.num_unknowns) = x;
        z.tail(F.num_params) = p0;
        double scale = std::max(1.0, compiled.scale(z, ws));
        if (compiled.residual(z, ws) > 1000.0 * settings.newton_tol * scale)
            throw input_error("parameter_track: start-point residual too large at p0");
    }
    return parameter_track_compiled(compiled, F.num_unknowns, start.points, p0, p1, settings);
}

SolutionSet parameter_track_compiled(const CompiledSystem& full, int num_unknowns,
                                     const std::vector<Eigen::VectorXcd>& starts,
                                     const Eigen::VectorXcd& p0, const Eigen::VectorXcd& p1,
                                     const TrackSettings& settings) {
    ParameterHomotopy H(full, num_unknowns, p0, p1);
    return run_paths(H, starts, settings);
}

std::vector<Eigen::VectorXd> real_points(const SolutionSet& S, double real_tol) {
    std::vector<Eigen::VectorXd> reals;
    for (const auto& x : S.points) {
        double im = x.imag().lpNorm<Eigen::Infinity>();
        if (im <= real_tol) reals.push_back(x.real());
    }
    std::vector<int> keep = dedup_indices(reals, std::max(1e-6, 2.0 * real_tol));
    std::vector<Eigen::VectorXd> out;
    out.reserve(keep.size());
    for (int i : keep) out.push_back(reals[i]);
    return out;
}

PolishResult newton_polish(const CompiledSystem& F, const Eigen::VectorXcd& x0,
                           const TrackSettings& settings, int iters) {
    if (iters <= 0) iters = 2 * settings.max_newton_iters;
    EvalWorkspace ws;
    Eigen::VectorXcd x = x0, h(F.num_polys()), dx(F.num_polys());
    Eigen::MatrixXcd J(F.num_polys(), F.num_vars());
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    PolishResult res;
    res.last_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iters; ++it) {
        F.eval(x, h, ws);
        F.eval_jacobian(x, J, ws);
        lu.compute(J);
        dx = lu.solve(-h);
        if (!dx.allFinite()) break;
        x += dx;
        res.last_step = dx.lpNorm<Eigen::Infinity>();
        double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
        if (res.last_step <= settings.newton_tol * scale) break;
    }
    res.x = x;
    res.residual = F.residual(x, ws);
    double scale = std::max(1.0, F.scale(x, ws));
    res.converged = x.allFinite() && res.residual <= 10.0 * settings.newton_tol * scale;
    return res;
}

}  // namespace vs
