#pragma once

#include <span>

#include "mnic/kernels.hpp"
#include "mnic/linalg.hpp"
#include "mnic/types.hpp"

namespace mnic {

// What to do when an arriving point sits in the span of the points already
// fitted. Strict raises RankDeficientError; Lenient drops the point and
// counts the skip. No jitter is ever added on the interpolation path.
enum class RankPolicy { Strict, Lenient };

// One accepted online step. epsilon is the prediction error of the state
// before the step, s_sq the squared projection distance of the new point to
// the span of its predecessors (Schur complement of the regularized Gram),
// and norm_increment the measured change of the squared norm. The identity
// epsilon^2 = s_sq * norm_increment holds up to roundoff; norm_increment is
// recomputed from the enlarged quadratic form rather than accumulated from
// epsilon^2 / s_sq precisely so that the identity stays checkable.
struct StepRecord {
    double epsilon;
    double s_sq;
    double norm_increment;
};

struct StepResult {
    double epsilon;
    bool skipped;
};

// Minimum-norm interpolator (lambda = 0) or kernel ridge fit (lambda > 0),
// maintained online. The state holds the fitted points, their labels, the
// Cholesky factor of K + lambda*I, the dual coefficients
// alpha = (K + lambda*I)^{-1} y and norm_sq = y^T alpha. At lambda = 0,
// norm_sq is the squared RKHS norm of the interpolant; for lambda > 0 it is
// the regularized quadratic form, which dominates the RKHS norm of the
// ridge fit.
class Interpolator {
public:
    explicit Interpolator(KernelSpec kernel, double lambda = 0.0,
                          RankPolicy policy = RankPolicy::Strict,
                          double tol_rank = 1e-10);

    // Feed one labeled point. Returns the prediction error of the previous
    // state; a Lenient skip leaves the state untouched.
    StepResult step(std::span<const double> x, double y);

    double predict(std::span<const double> x) const;

    // Batch prediction, parallel over query points.
    Vec predict_many(const std::vector<Vec>& queries) const;

    // Dual coefficients of the average of the n prefix fits.
    Vec polyak_dual() const;
    double predict_polyak(std::span<const double> x) const;

    // Components of the labels along the orthonormal directions built up by
    // the factorization; prefix sums of these against a query's coordinates
    // reproduce every intermediate fit (see prefix_predictions).
    Vec qr_coefficients() const;

    // f_k(x) for k = 1..n, where f_k is the fit to the first k points.
    // qr is the cached result of qr_coefficients().
    Vec prefix_predictions(std::span<const double> x, const Vec& qr) const;

    std::size_t size() const { return points_.size(); }
    double lambda() const { return lambda_; }
    double norm_sq() const { return norm_sq_; }
    RankPolicy policy() const { return policy_; }
    std::size_t skipped() const { return skipped_; }
    const KernelSpec& kernel() const { return kernel_; }
    const std::vector<Vec>& points() const { return points_; }
    const Vec& labels() const { return labels_; }
    const Vec& dual() const { return dual_; }
    const CholFactor& chol() const { return chol_; }
    const std::vector<StepRecord>& step_log() const { return step_log_; }

    // Echo skipped points to stderr. Off by default so library use is quiet.
    void set_log_skips(bool v) { log_skips_ = v; }

    friend Interpolator fit_batch(const KernelSpec&, const Dataset&, double,
                                  RankPolicy, double);

private:
    KernelSpec kernel_;
    double lambda_;
    RankPolicy policy_;
    CholFactor chol_;
    std::vector<Vec> points_;
    Vec labels_;
    Vec dual_;
    double norm_sq_ = 0.0;
    std::vector<StepRecord> step_log_;
    std::size_t skipped_ = 0;
    bool log_skips_ = false;
};

// One-shot fit. Equivalent to feeding the dataset through step() in order,
// but assembles the Gram matrix in one parallel pass and leaves the step
// log empty.
Interpolator fit_batch(const KernelSpec& kernel, const Dataset& data,
                       double lambda = 0.0,
                       RankPolicy policy = RankPolicy::Strict,
                       double tol_rank = 1e-10);

namespace serial {
Vec predict_many(const Interpolator& state, const std::vector<Vec>& queries);
}

// Finite-dimensional form of the same online update, tracking the weight
// vector directly. The projection of the incoming feature row onto the
// orthogonal complement of the previous rows is computed by Gram-Schmidt
// against a maintained orthonormal basis (two passes, which keeps the basis
// orthonormal to working precision).
class FeatureInterpolator {
public:
    explicit FeatureInterpolator(std::size_t p,
                                 RankPolicy policy = RankPolicy::Strict,
                                 double tol_rank = 1e-10);

    StepResult step(std::span<const double> phi, double y);

    double predict(std::span<const double> phi) const { return dot(beta_, phi); }

    std::size_t dim() const { return p_; }
    std::size_t size() const { return count_; }
    std::size_t skipped() const { return skipped_; }
    const Vec& beta() const { return beta_; }
    const std::vector<Vec>& basis() const { return basis_; }
    const std::vector<StepRecord>& step_log() const { return step_log_; }

private:
    std::size_t p_;
    RankPolicy policy_;
    double tol_rank_;
    Vec beta_;
    std::vector<Vec> basis_;
    std::size_t count_ = 0;
    std::size_t skipped_ = 0;
    std::vector<StepRecord> step_log_;
};

} // namespace mnic
