#pragma once

#include <cstdint>
#include <vector>

#include "mnic/genmodels.hpp"
#include "mnic/interpolator.hpp"
#include "mnic/types.hpp"

namespace mnic {

// Accounting for one completed online run. The cumulative square loss is
// pinched between r_n^2 * B_n^2 and R_n^2 * B_n^2, where B_n^2 is the final
// (regularized) squared norm, R_n^2 the largest self-similarity of a fitted
// point and r_n^2 the smallest squared leave-one-out distance. Both extremes
// include the ridge shift: R_n^2 = max_i k(x_i, x_i) + lambda and r_n^2 is
// computed on K + lambda*I, which is what makes the pinch hold verbatim for
// lambda > 0. Mistakes are counted with ties against the learner
// (y * f <= 0) and never exceed the upper bound.
struct RegretReport {
    std::size_t n;
    double sq_loss;
    std::size_t mistakes;
    double R_n_sq;
    double r_n_sq;
    double norm_sq_final;
    double lower_bound;
    double upper_bound;
    std::vector<StepRecord> per_step;
};

// Build the report from a state produced by online steps. The state's own
// stored labels and step log are the source of truth; lenient skips are
// simply absent from both.
RegretReport build_report(const Interpolator& state);

// Per-prefix held-out risk curves of a fitted state, plus the risk of the
// averaged predictor. risk_strict uses y * f < 0, risk_tie counts ties as
// errors. sq_mean[k] is the mean of (1 - y * f_k)^2, the quantity whose
// expectation dominates the tie risk by Markov's inequality.
struct RiskCurves {
    Vec risk_strict;
    Vec risk_tie;
    Vec sq_mean;
    double polyak_risk_tie;
};

RiskCurves evaluate_prefix_risks(const Interpolator& state, const Dataset& test);

struct GeneralizationRow {
    std::size_t n;
    double est_min_risk, est_min_risk_se;
    double est_final_risk, est_final_risk_se;
    double est_polyak_risk, est_polyak_risk_se;
    double bound, bound_se;               // mean R_n^2 B_n^2 / n
    double polyak_bound, polyak_bound_se; // mean R_{n+1}^2 B_{n+1}^2 / (n+1)
    std::size_t discarded_trials;
};

struct GeneralizationEstimate {
    std::size_t trials = 0;
    std::size_t test_size = 0;
    std::vector<GeneralizationRow> rows;
};

// Monte Carlo estimate of the generalization quantities across an n grid.
// Each trial draws n+1 training points and a fresh test set: the first n
// drive the risk curves and the norm bound, the extra point feeds the
// averaged predictor's bound at n+1. Trials run in parallel with per-trial
// seeds and aggregate in trial order. Rank-deficient trials propagate under
// Strict and are discarded (and counted) under Lenient.
GeneralizationEstimate estimate_generalization(
    const GenerativeModelSpec& model, const KernelSpec& kernel, double lambda,
    const std::vector<std::size_t>& n_grid, std::size_t trials,
    std::size_t test_size, std::uint64_t seed,
    RankPolicy policy = RankPolicy::Strict);

struct MarkovRow {
    std::size_t k;
    double p_hat;
    double m_hat;
    double se;
    bool ok;
};

struct MarkovReport {
    std::vector<MarkovRow> rows;
    bool all_ok = true;
};

// Checks, per prefix k (subsampled by stride), that the estimated tie risk
// is dominated by the estimated mean square margin loss plus two standard
// errors on held-out data.
MarkovReport markov_risk_check(const Interpolator& state, const Dataset& test,
                               std::size_t stride = 1);

} // namespace mnic
