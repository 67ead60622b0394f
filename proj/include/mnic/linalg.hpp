#pragma once

#include <span>

#include "mnic/types.hpp"

namespace mnic {

// Growing Cholesky factorization K = R^T R with R upper triangular.
//
// Appending a point with kernel column k_new and self-similarity k_diag
// extends R by one column (w, s) where R^T w = k_new and
// s^2 = k_diag - ||w||^2. That s^2 is the Schur complement of the enlarged
// matrix, which equals the squared distance from the new feature vector to
// the span of the old ones. The running diagonal R[i][i] therefore records
// the projection distance of each point to its predecessors, which is what
// ties the factorization to the online update and its regret accounting.
//
// Storage is column packed: column j holds entries R[0..j][j]. A column is
// only committed after its Schur complement clears the rank tolerance, so a
// failed append leaves the factor untouched.
class CholFactor {
public:
    explicit CholFactor(double tol_rank = 1e-10) : tol_rank_(tol_rank) {}

    std::size_t size() const { return n_; }
    double tol_rank() const { return tol_rank_; }

    double operator()(std::size_t i, std::size_t j) const {
        return cols_[col_start(j) + i];
    }
    double diag(std::size_t i) const { return cols_[col_start(i) + i]; }

    // Returns s = R[n][n] of the enlarged factor. Throws RankDeficientError
    // when the Schur complement falls below tol_rank * max(1, k_diag).
    double append(std::span<const double> k_new, double k_diag);

    // Solve R^T u = b (forward substitution).
    Vec solve_transposed(std::span<const double> b) const;
    // Solve R x = c (back substitution).
    Vec solve_upper(std::span<const double> c) const;
    // Solve (R^T R) x = b.
    Vec solve_spd(std::span<const double> b) const;

private:
    static std::size_t col_start(std::size_t j) { return j * (j + 1) / 2; }

    std::size_t n_ = 0;
    double tol_rank_;
    std::vector<double> cols_;
};

// Factor a full symmetric positive definite matrix by appending its columns
// in order. Throws RankDeficientError if K is (numerically) singular.
CholFactor factor(const Mat& K, double tol_rank = 1e-10);

// Distance from each point's feature vector to the span of all the others:
// s_{loo}[i] = 1 / sqrt((K^{-1})[i][i]). Computed from one factorization
// plus one triangular solve per point; the solves are independent so the
// default entry point runs them under OpenMP. serial::loo_distances is the
// plain loop kept for testing.
Vec loo_distances(const CholFactor& R);
Vec loo_distances(const Mat& K, double tol_rank = 1e-10);

namespace serial {
Vec loo_distances(const CholFactor& R);
}

// z = R^{-T} y. Entry k is the component of the k-th label along the k-th
// orthonormal direction of the implicit QR of the feature rows, so prefix
// sums of z against q-coordinates reproduce every intermediate interpolant.
Vec qr_coefficients(const CholFactor& R, std::span<const double> y);

// Dual coefficients of the interpolant fitted to the first k points only,
// embedded in length-n: c = R^{-1} P_k R^{-T} y.
Vec prefix_dual(const CholFactor& R, std::span<const double> y, std::size_t k);

// Dual coefficients of the running average of all n prefix interpolants:
// c = R^{-1} D R^{-T} y with D[k][k] = 1 - (k-1)/n, 1-based.
Vec average_dual(const CholFactor& R, std::span<const double> y);

// Paired projection distances of a fitted factor: step[i] = R[i][i] (distance
// to the points seen before i) and loo[i] (distance to all other points).
// Conditioning on more points can only shrink a distance, so loo[i] <=
// step[i] with equality at the last index.
struct ProjectionDistances {
    Vec step;
    Vec loo;
};

ProjectionDistances projection_distances(const CholFactor& R);

} // namespace mnic
