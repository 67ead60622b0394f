#pragma once

#include <cstdint>
#include <vector>

#include "mnic/interpolator.hpp"
#include "mnic/kernels.hpp"
#include "mnic/rng.hpp"
#include "mnic/types.hpp"

namespace mnic {

enum class ModelKind { GmmGaussian, GeneralMixture };
enum class NoiseKind { Gaussian, Rademacher, StudentT };
enum class SpectrumKind { Flat, PowerLaw, Explicit };

// Covariance spectrum for the general mixture, diagonal in the standard
// basis. realize(p) materializes the eigenvalues lambda_1 >= ... >= lambda_p > 0.
struct SpectrumSpec {
    SpectrumKind kind = SpectrumKind::Flat;
    double value = 1.0;   // Flat
    double alpha = 0.5;   // PowerLaw: lambda_i = i^{-alpha}
    Vec values;           // Explicit

    Vec realize(std::size_t p) const;
};

// Two-component symmetric mixture over feature space. Labels are uniform on
// {-1,+1}; a point is y * mu * theta + noise, where the noise is isotropic
// N(0, I/d) for the Gaussian kind and Sigma^{1/2} * (iid unit-variance
// coordinates) for the general kind. dim fixes the ambient dimension; when
// it is 0 the dimension is derived as ceil(psi * n) at sampling time, which
// is how the growth experiments keep the overparametrization ratio fixed.
struct GenerativeModelSpec {
    ModelKind kind = ModelKind::GmmGaussian;
    double mu = 1.0;
    double psi = 0.0;           // dimension ratio, used when dim == 0
    std::size_t dim = 0;        // d (Gaussian kind) or p (general kind)
    Vec theta_star;             // empty means e1; normalized on validate()
    SpectrumSpec spectrum;      // general kind only
    NoiseKind noise = NoiseKind::Gaussian;
    double student_dof = 8.0;   // StudentT, > 2 (standardized to unit variance)
    bool rotate = false;        // general kind: conjugate by a random rotation

    void validate() const;
    std::size_t ambient_dim(std::size_t n) const;
};

Dataset sample(const GenerativeModelSpec& model, std::size_t n, Rng& rng);

// Limiting squared norm of the interpolant under the Gaussian mixture with
// dimension ratio psi > 1: psi / ((psi - 1) * mu^2).
double gmm_norm_limit(double mu, double psi);

// Limiting cumulative mistake bound: (mu + 1)^2 * psi / ((psi - 1) * mu^2).
double gmm_mistake_limit(double mu, double psi);

struct BoundConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
};

// Value and factors of the covariance-dependent generalization bound for
// the general mixture, at ridge parameter lambda >= 0 (lambda = 0 is the
// interpolation case). gamma_p = p^{1/2 + 2/m} (log p)^{0.51} with m the
// noise moment order (infinite for Gaussian and Rademacher noise, the
// degrees of freedom for Student-t).
struct MixtureBoundParts {
    double value;
    double mu_sq;
    double trace;
    double gamma_p;
    double lambda_1_eff;     // lambda/p + lambda_1
    double lambda_p_eff;     // lambda/p + lambda_p
    double theta_cov_theta;  // theta^T Sigma theta
    double np_ratio;         // n / p
    double numerator;
    double denominator;
};

MixtureBoundParts mixture_regret_bound(const GenerativeModelSpec& model,
                                       std::size_t n, double lambda,
                                       const BoundConstants& c = {});

// Phase classification of the mixture in log-log exponents: mu^2 = n^x,
// p = n^y with y > 1, power-law spectrum i^{-alpha} with alpha in (0, 1/2).
// DecayingInterpolation means the interpolation bound is vanishing in that
// corner of the phase plane, DecayingRidge that only the ridge-regularized
// bound is known to vanish, Unknown that neither criterion applies.
enum class Region { DecayingInterpolation, DecayingRidge, Unknown };

Region region_classify(double x_exp, double y_exp, double alpha,
                       bool allow_ridge);
const char* region_name(Region r);

struct TraceRow {
    std::size_t n;
    double norm_mean;
    double norm_se;
    double mistakes_mean;
    double mistakes_se;
    double theory_norm;      // NaN when no closed form applies
    double theory_mistakes;
};

struct NormGrowthTrace {
    std::size_t trials = 0;
    std::vector<TraceRow> rows;
};

// Fit a fresh stream per (n, trial) with the ambient dimension rescaled per
// psi, recording the final squared norm and the cumulative online mistakes.
// Trials run in parallel with per-trial seeds; aggregation is in trial
// order, so results do not depend on the thread count.
NormGrowthTrace norm_growth_experiment(const GenerativeModelSpec& model,
                                       const KernelSpec& kernel,
                                       const std::vector<std::size_t>& n_grid,
                                       std::size_t trials, std::uint64_t seed,
                                       RankPolicy policy = RankPolicy::Strict,
                                       double lambda = 0.0);

struct RnFitRow {
    std::size_t n;
    double r_n_sq_mean;
    double r_n_sq_se;
    double c_hat;  // ((mu^2 + 1) / r_n_sq_mean - 1) / n
};

// Empirical check that the smallest leave-one-out distance shrinks no
// faster than (mu^2 + 1) / (1 + C n): measures r_n^2 and backs out C.
std::vector<RnFitRow> r_n_lower_check(const GenerativeModelSpec& model,
                                      const std::vector<std::size_t>& n_grid,
                                      std::size_t trials, std::uint64_t seed);

} // namespace mnic
