#include "mnic/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mnic {

double CholFactor::append(std::span<const double> k_new, double k_diag) {
    if (k_new.size() != n_)
        throw std::invalid_argument("cholesky append: column has wrong length");

    Vec w = solve_transposed(k_new);
    const double schur = k_diag - norm_sq(w);
    const double tol = tol_rank_ * std::max(1.0, k_diag);
    if (!(schur >= tol))
        throw RankDeficientError(schur,
            "cholesky append: point lies in the span of previous points");

    const double s = std::sqrt(schur);
    cols_.insert(cols_.end(), w.begin(), w.end());
    cols_.push_back(s);
    ++n_;
    return s;
}

Vec CholFactor::solve_transposed(std::span<const double> b) const {
    if (b.size() != n_)
        throw std::invalid_argument("cholesky solve: rhs has wrong length");
    Vec u(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        const double* col = cols_.data() + col_start(j);
        double acc = b[j];
        for (std::size_t i = 0; i < j; ++i) acc -= col[i] * u[i];
        u[j] = acc / col[j];
    }
    return u;
}

Vec CholFactor::solve_upper(std::span<const double> c) const {
    if (c.size() != n_)
        throw std::invalid_argument("cholesky solve: rhs has wrong length");
    Vec x(c.begin(), c.end());
    for (std::size_t jj = n_; jj-- > 0;) {
        const double* col = cols_.data() + col_start(jj);
        x[jj] /= col[jj];
        const double xj = x[jj];
        for (std::size_t i = 0; i < jj; ++i) x[i] -= col[i] * xj;
    }
    return x;
}

Vec CholFactor::solve_spd(std::span<const double> b) const {
    return solve_upper(solve_transposed(b));
}

CholFactor factor(const Mat& K, double tol_rank) {
    if (K.rows() != K.cols())
        throw std::invalid_argument("factor: matrix must be square");
    CholFactor R(tol_rank);
    Vec col;
    for (std::size_t j = 0; j < K.rows(); ++j) {
        col.assign(K.row(j), K.row(j) + j);
        R.append(col, K(j, j));
    }
    return R;
}

namespace {

// (K^{-1})[i][i] = ||R^{-T} e_i||^2. The forward solve against e_i has zero
// leading entries, so it starts at row i.
double inv_diag_entry(const CholFactor& R, std::size_t i) {
    const std::size_t n = R.size();
    Vec u(n, 0.0);
    u[i] = 1.0 / R(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = i; k < j; ++k) acc -= R(k, j) * u[k];
        u[j] = acc / R(j, j);
    }
    double s = 0.0;
    for (std::size_t j = i; j < n; ++j) s += u[j] * u[j];
    return s;
}

} // namespace

namespace serial {
Vec loo_distances(const CholFactor& R) {
    Vec out(R.size());
    for (std::size_t i = 0; i < R.size(); ++i)
        out[i] = 1.0 / std::sqrt(inv_diag_entry(R, i));
    return out;
}
} // namespace serial

Vec loo_distances(const CholFactor& R) {
    const std::int64_t n = static_cast<std::int64_t>(R.size());
    Vec out(R.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        out[ui] = 1.0 / std::sqrt(inv_diag_entry(R, ui));
    }
    return out;
}

Vec loo_distances(const Mat& K, double tol_rank) {
    return loo_distances(factor(K, tol_rank));
}

Vec qr_coefficients(const CholFactor& R, std::span<const double> y) {
    return R.solve_transposed(y);
}

Vec prefix_dual(const CholFactor& R, std::span<const double> y, std::size_t k) {
    if (k > R.size())
        throw std::invalid_argument("prefix dual: k exceeds factor size");
    Vec z = R.solve_transposed(y);
    std::fill(z.begin() + static_cast<std::ptrdiff_t>(k), z.end(), 0.0);
    return R.solve_upper(z);
}

Vec average_dual(const CholFactor& R, std::span<const double> y) {
    const std::size_t n = R.size();
    if (n == 0) return {};
    Vec z = R.solve_transposed(y);
    for (std::size_t k = 0; k < n; ++k)
        z[k] *= 1.0 - static_cast<double>(k) / static_cast<double>(n);
    return R.solve_upper(z);
}

ProjectionDistances projection_distances(const CholFactor& R) {
    ProjectionDistances d;
    d.step.resize(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) d.step[i] = R.diag(i);
    d.loo = loo_distances(R);
    return d;
}

} // namespace mnic
