#include "mnic/interpolator.hpp"

#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>

namespace mnic {

Interpolator::Interpolator(KernelSpec kernel, double lambda, RankPolicy policy,
                           double tol_rank)
    : kernel_(std::move(kernel)), lambda_(lambda), policy_(policy),
      chol_(tol_rank) {
    kernel_.validate();
    if (!(lambda_ >= 0.0))
        throw std::invalid_argument("interpolator: lambda must be >= 0");
}

StepResult Interpolator::step(std::span<const double> x, double y) {
    Vec k_new = cross_gram(kernel_, points_, x);
    const double k_diag = kernel_eval(kernel_, x, x);
    // Prediction error of the state before this point is added.
    const double eps = y - dot(dual_, k_new);

    double s;
    try {
        s = chol_.append(k_new, k_diag + lambda_);
    } catch (const RankDeficientError& e) {
        if (policy_ == RankPolicy::Strict) throw;
        ++skipped_;
        if (log_skips_)
            std::cerr << "interpolator: skipped in-span point (schur="
                      << e.schur_sq() << ", epsilon=" << eps << ")\n";
        return {eps, true};
    }

    points_.emplace_back(x.begin(), x.end());
    labels_.push_back(y);
    dual_ = chol_.solve_spd(labels_);
    const double new_norm = dot(labels_, dual_);
    step_log_.push_back({eps, s * s, new_norm - norm_sq_});
    norm_sq_ = new_norm;
    return {eps, false};
}

double Interpolator::predict(std::span<const double> x) const {
    if (points_.empty()) return 0.0;
    return dot(dual_, cross_gram(kernel_, points_, x));
}

Vec Interpolator::predict_many(const std::vector<Vec>& queries) const {
    Vec out(queries.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(queries.size()); ++i)
        out[static_cast<std::size_t>(i)] = predict(queries[static_cast<std::size_t>(i)]);
    return out;
}

Vec Interpolator::polyak_dual() const { return average_dual(chol_, labels_); }

double Interpolator::predict_polyak(std::span<const double> x) const {
    if (points_.empty()) return 0.0;
    return dot(polyak_dual(), cross_gram(kernel_, points_, x));
}

Vec Interpolator::qr_coefficients() const {
    return mnic::qr_coefficients(chol_, labels_);
}

Vec Interpolator::prefix_predictions(std::span<const double> x, const Vec& qr) const {
    const Vec k_x = cross_gram(kernel_, points_, x);
    const Vec w = chol_.solve_transposed(k_x);
    Vec f(points_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        acc += w[k] * qr[k];
        f[k] = acc;
    }
    return f;
}

Interpolator fit_batch(const KernelSpec& kernel, const Dataset& data,
                       double lambda, RankPolicy policy, double tol_rank) {
    if (data.points.size() != data.labels.size())
        throw std::invalid_argument("fit_batch: points and labels disagree in length");

    Interpolator state(kernel, lambda, policy, tol_rank);
    if (data.size() == 0) return state;

    // Assemble the Gram matrix once (parallel), then grow the factor from
    // its columns. Only rows of accepted points enter a column, so lenient
    // skips keep the factor consistent with the stored points.
    const Mat K = gram(kernel, data.points);
    std::vector<std::size_t> accepted;
    Vec col;
    for (std::size_t j = 0; j < data.size(); ++j) {
        col.resize(accepted.size());
        for (std::size_t r = 0; r < accepted.size(); ++r)
            col[r] = K(accepted[r], j);
        try {
            state.chol_.append(col, K(j, j) + lambda);
        } catch (const RankDeficientError& e) {
            if (policy == RankPolicy::Strict) throw;
            ++state.skipped_;
            if (state.log_skips_)
                std::cerr << "fit_batch: skipped in-span point (schur="
                          << e.schur_sq() << ")\n";
            continue;
        }
        accepted.push_back(j);
        state.points_.push_back(data.points[j]);
        state.labels_.push_back(data.labels[j]);
    }
    if (!state.labels_.empty()) {
        state.dual_ = state.chol_.solve_spd(state.labels_);
        state.norm_sq_ = dot(state.labels_, state.dual_);
    }
    return state;
}

namespace serial {
Vec predict_many(const Interpolator& state, const std::vector<Vec>& queries) {
    Vec out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
        out[i] = state.predict(queries[i]);
    return out;
}
} // namespace serial

FeatureInterpolator::FeatureInterpolator(std::size_t p, RankPolicy policy,
                                         double tol_rank)
    : p_(p), policy_(policy), tol_rank_(tol_rank), beta_(p, 0.0) {
    if (p == 0)
        throw std::invalid_argument("feature interpolator: dimension must be positive");
}

StepResult FeatureInterpolator::step(std::span<const double> phi, double y) {
    if (phi.size() != p_)
        throw std::invalid_argument("feature interpolator: feature row has wrong length");

    const double eps = y - dot(beta_, phi);

    Vec h(phi.begin(), phi.end());
    for (int pass = 0; pass < 2; ++pass)
        for (const Vec& q : basis_)
            axpy(-dot(q, h), q, h);

    const double s_sq = norm_sq(h);
    const double tol = tol_rank_ * std::max(1.0, norm_sq(phi));
    if (!(s_sq >= tol)) {
        if (policy_ == RankPolicy::Strict)
            throw RankDeficientError(s_sq,
                "feature interpolator: row lies in the span of previous rows");
        ++skipped_;
        return {eps, true};
    }

    const double old_norm = norm_sq(beta_);
    axpy(eps / s_sq, h, beta_);
    const double new_norm = norm_sq(beta_);

    const double s = std::sqrt(s_sq);
    Vec q(h);
    for (double& v : q) v /= s;
    basis_.push_back(std::move(q));

    ++count_;
    step_log_.push_back({eps, s_sq, new_norm - old_norm});
    return {eps, false};
}

} // namespace mnic
