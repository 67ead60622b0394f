#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mnic/genmodels.hpp"
#include "mnic/types.hpp"

namespace mnic {

// Regression function E[y | x] of a mixture with Gaussian noise, in closed
// tanh form via the likelihood ratio. Throws for noise kinds without a
// tractable density.
double eta_star(const GenerativeModelSpec& model, std::span<const double> x);

// Average conditional Bayes error proxy over a sample: mean of 1 - eta^2.
double bayes_error(const GenerativeModelSpec& model, const std::vector<Vec>& X);

// Conditional expectation bound on the interpolant's squared norm given the
// points: cap^2 + (1 / r_n_sq) * sum_i (1 - eta^2(x_i)), where cap bounds
// the RKHS norm of the regression function.
double conditional_norm_bound(double eta_cap, double r_n_sq,
                              const GenerativeModelSpec& model,
                              const std::vector<Vec>& X);

// Bayes error bound under the margin (Mammen-Tsybakov) condition with
// exponent alpha in [0, 1]: c0 * 2 * (1 - alpha) / (2 - alpha).
double tsybakov_bayes_bound(double alpha, double c0);

// Lower bound on the probability that the average conditional Bayes error
// stays below 4 * epsilon, in terms of the total variation separation of
// the two class conditionals: 1 - ((1/eps + 1) / 2) * n * (1 - tv).
double tv_separation_prob(double tv, std::size_t n, double epsilon);

// Exact total variation between the two Gaussian class conditionals. The
// general form reduces along theta to a one-dimensional pair of Gaussians:
// 2 * Phi(mu * sqrt(theta^T Sigma^{-1} theta)) - 1.
double gaussian_mixture_tv(const GenerativeModelSpec& model);
double gaussian_mixture_tv(double mu, std::size_t d);

// Exponential comparison form 1 - exp(-d mu^2 / 2). A valid lower bound on
// the exact value, reported alongside it but never asserted equal.
double gaussian_mixture_tv_exp_form(double mu, std::size_t d);

struct ConditionalNormEstimate {
    double mean;
    double se;
    std::size_t redraws;
};

// Monte Carlo over label redraws with the points held fixed: y_i drawn with
// P(y=1|x_i) = (1 + eta(x_i)) / 2, interpolant refitted, squared norm
// averaged. Redraws run in parallel with per-redraw seeds and aggregate in
// redraw order.
ConditionalNormEstimate conditional_norm_mc(const GenerativeModelSpec& model,
                                            const std::vector<Vec>& X,
                                            const KernelSpec& kernel,
                                            std::size_t redraws,
                                            std::uint64_t seed);

struct SeparationReport {
    std::size_t n;
    double bayes_err;
    double tv;
    double tv_exp_form;
    double cond_norm_bound;
    double separation_prob;
    double r_n_sq;
    double eta_cap;
    double epsilon;
    std::size_t redraws;  // 0 when the label-redraw check was not run
    double norm_mc_mean;  // NaN when redraws == 0
    double norm_mc_se;
};

// Sample n points from the model, measure the leave-one-out floor under the
// linear kernel, and assemble the separation quantities. epsilon <= 0
// selects the 1/n default. redraws > 0 additionally runs the label-redraw
// Monte Carlo on the same design, so the reported mean can be compared
// against cond_norm_bound directly.
SeparationReport separation_report(const GenerativeModelSpec& model,
                                   std::size_t n, double eta_cap,
                                   double epsilon, std::uint64_t seed,
                                   std::size_t redraws = 0);

} // namespace mnic
