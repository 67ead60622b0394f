#include "mnic/regret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "mnic/linalg.hpp"

namespace mnic {

RegretReport build_report(const Interpolator& state) {
    const std::size_t n = state.size();
    if (state.step_log().size() != n)
        throw std::invalid_argument(
            "report: state was not produced by online steps");

    RegretReport rep{};
    rep.n = n;
    rep.per_step = state.step_log();
    rep.norm_sq_final = state.norm_sq();

    rep.sq_loss = 0.0;
    rep.mistakes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double eps = rep.per_step[i].epsilon;
        const double y = state.labels()[i];
        rep.sq_loss += eps * eps;
        const double pred = y - eps;  // prediction of the state before step i
        if (y * pred <= 0.0) ++rep.mistakes;
    }

    rep.R_n_sq = 0.0;
    for (const Vec& x : state.points())
        rep.R_n_sq = std::max(rep.R_n_sq,
                              kernel_eval(state.kernel(), x, x) + state.lambda());

    if (n > 0) {
        const Vec loo = loo_distances(state.chol());
        double rmin = loo.front();
        for (double s : loo) rmin = std::min(rmin, s);
        rep.r_n_sq = rmin * rmin;
    } else {
        rep.r_n_sq = 0.0;
    }

    rep.lower_bound = rep.r_n_sq * rep.norm_sq_final;
    rep.upper_bound = rep.R_n_sq * rep.norm_sq_final;
    return rep;
}

RiskCurves evaluate_prefix_risks(const Interpolator& state, const Dataset& test) {
    const std::size_t n = state.size();
    const std::size_t m = test.size();
    if (m == 0)
        throw std::invalid_argument("risk curves: empty test set");
    if (n == 0)
        throw std::invalid_argument("risk curves: empty state");

    const Vec z = state.qr_coefficients();

    // Phase 1 (parallel): per-prefix predictions for every test point. The
    // matrix is filled slot-by-slot, so thread scheduling cannot change it.
    Mat preds(m, n);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(m); ++j) {
        const auto uj = static_cast<std::size_t>(j);
        const Vec f = state.prefix_predictions(test.points[uj], z);
        std::copy(f.begin(), f.end(), preds.row(uj));
    }

    // Phase 2 (serial, fixed order): aggregate counts and means.
    RiskCurves out;
    out.risk_strict.assign(n, 0.0);
    out.risk_tie.assign(n, 0.0);
    out.sq_mean.assign(n, 0.0);
    out.polyak_risk_tie = 0.0;

    for (std::size_t j = 0; j < m; ++j) {
        const double y = test.labels[j];
        const double* f = preds.row(j);
        double polyak = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double margin = y * f[k];
            if (margin < 0.0) out.risk_strict[k] += 1.0;
            if (margin <= 0.0) out.risk_tie[k] += 1.0;
            const double miss = 1.0 - margin;
            out.sq_mean[k] += miss * miss;
            // The averaged predictor weights prefix k by (n - k) / n in the
            // orthogonal expansion; equivalently it is the mean of the n
            // prefix predictions.
            polyak += f[k];
        }
        polyak /= static_cast<double>(n);
        if (y * polyak <= 0.0) out.polyak_risk_tie += 1.0;
    }

    const double md = static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) {
        out.risk_strict[k] /= md;
        out.risk_tie[k] /= md;
        out.sq_mean[k] /= md;
    }
    out.polyak_risk_tie /= md;
    return out;
}

namespace {

struct TrialOutcome {
    bool ok = false;
    bool discarded = false;
    bool rank_deficient = false;
    double schur_sq = 0.0;
    std::string error;
    double min_risk = 0.0;
    double final_risk = 0.0;
    double polyak_risk = 0.0;
    double rb = 0.0;        // R_n^2 B_n^2
    double rb_next = 0.0;   // R_{n+1}^2 B_{n+1}^2
};

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se_of(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return {m, sd / std::sqrt(n)};
}

} // namespace

GeneralizationEstimate estimate_generalization(
    const GenerativeModelSpec& model, const KernelSpec& kernel, double lambda,
    const std::vector<std::size_t>& n_grid, std::size_t trials,
    std::size_t test_size, std::uint64_t seed, RankPolicy policy) {
    if (trials == 0)
        throw std::invalid_argument("generalization: trials must be positive");
    if (test_size == 0)
        throw std::invalid_argument("generalization: test_size must be positive");
    model.validate();

    GeneralizationEstimate est;
    est.trials = trials;
    est.test_size = test_size;

    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const std::size_t n = n_grid[gi];
        if (n == 0)
            throw std::invalid_argument("generalization: n must be positive");
        if (gi > 0 && n <= n_grid[gi - 1])
            throw std::invalid_argument("generalization: n grid must be strictly increasing");

        // The sampled dimension must not drift between the n and n+1 point
        // draws of one trial, so pin it per grid entry.
        GenerativeModelSpec fixed = model;
        if (fixed.dim == 0) fixed.dim = fixed.ambient_dim(n);

        std::vector<TrialOutcome> outcomes(trials);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            const auto ut = static_cast<std::size_t>(t);
            TrialOutcome& oc = outcomes[ut];
            try {
                Rng rng = make_rng(derive_seed(seed, n, ut));
                const Dataset train = sample(fixed, n + 1, rng);
                const Dataset test = sample(fixed, test_size, rng);

                Interpolator state(kernel, lambda, RankPolicy::Strict);
                double r_sq_max = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    state.step(train.points[i], train.labels[i]);
                    r_sq_max = std::max(
                        r_sq_max,
                        kernel_eval(kernel, train.points[i], train.points[i]) + lambda);
                }
                oc.rb = r_sq_max * state.norm_sq();

                const RiskCurves curves = evaluate_prefix_risks(state, test);
                oc.min_risk = *std::min_element(curves.risk_strict.begin(),
                                                curves.risk_strict.end());
                oc.final_risk = curves.risk_tie.back();
                oc.polyak_risk = curves.polyak_risk_tie;

                state.step(train.points[n], train.labels[n]);
                const double r_next = std::max(
                    r_sq_max,
                    kernel_eval(kernel, train.points[n], train.points[n]) + lambda);
                oc.rb_next = r_next * state.norm_sq();
                oc.ok = true;
            } catch (const RankDeficientError& e) {
                if (policy == RankPolicy::Lenient) {
                    oc.discarded = true;
                } else {
                    oc.rank_deficient = true;
                    oc.schur_sq = e.schur_sq();
                    oc.error = e.what();
                }
            } catch (const std::exception& e) {
                oc.error = e.what();
            }
        }

        GeneralizationRow row{};
        row.n = n;
        std::vector<double> mins, finals, polyaks, rbs, rbs_next;
        for (const TrialOutcome& oc : outcomes) {
            if (oc.discarded) {
                ++row.discarded_trials;
                continue;
            }
            if (!oc.ok) {
                if (oc.rank_deficient)
                    throw RankDeficientError(oc.schur_sq, oc.error);
                throw std::runtime_error("generalization: trial failed: " + oc.error);
            }
            mins.push_back(oc.min_risk);
            finals.push_back(oc.final_risk);
            polyaks.push_back(oc.polyak_risk);
            rbs.push_back(oc.rb);
            rbs_next.push_back(oc.rb_next);
        }
        if (mins.empty())
            throw std::runtime_error("generalization: every trial was discarded");

        const MeanSe a = mean_se_of(mins);
        row.est_min_risk = a.mean;
        row.est_min_risk_se = a.se;
        const MeanSe b = mean_se_of(finals);
        row.est_final_risk = b.mean;
        row.est_final_risk_se = b.se;
        const MeanSe c = mean_se_of(polyaks);
        row.est_polyak_risk = c.mean;
        row.est_polyak_risk_se = c.se;
        const MeanSe d = mean_se_of(rbs);
        row.bound = d.mean / static_cast<double>(n);
        row.bound_se = d.se / static_cast<double>(n);
        const MeanSe e = mean_se_of(rbs_next);
        row.polyak_bound = e.mean / static_cast<double>(n + 1);
        row.polyak_bound_se = e.se / static_cast<double>(n + 1);
        est.rows.push_back(row);
    }
    return est;
}

MarkovReport markov_risk_check(const Interpolator& state, const Dataset& test,
                               std::size_t stride) {
    if (stride == 0)
        throw std::invalid_argument("markov check: stride must be positive");
    const RiskCurves curves = evaluate_prefix_risks(state, test);
    const double m = static_cast<double>(test.size());

    MarkovReport rep;
    for (std::size_t k = 0; k < state.size(); k += stride) {
        // Sample standard error of the square margin loss at prefix k.
        // Recomputed from the identity var = E[z^2] - E[z]^2 would lose
        // precision; do one more pass over predictions instead.
        rep.rows.push_back({k + 1, curves.risk_tie[k], curves.sq_mean[k], 0.0, true});
    }

    // Second pass for the standard errors.
    const Vec z = state.qr_coefficients();
    std::vector<double> ss(rep.rows.size(), 0.0);
    for (std::size_t j = 0; j < test.size(); ++j) {
        const Vec f = state.prefix_predictions(test.points[j], z);
        for (std::size_t r = 0; r < rep.rows.size(); ++r) {
            const std::size_t k = rep.rows[r].k - 1;
            const double miss = 1.0 - test.labels[j] * f[k];
            const double val = miss * miss;
            ss[r] += (val - rep.rows[r].m_hat) * (val - rep.rows[r].m_hat);
        }
    }
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        const double sd = test.size() > 1
                              ? std::sqrt(ss[r] / (m - 1.0))
                              : 0.0;
        rep.rows[r].se = sd / std::sqrt(m);
        rep.rows[r].ok = rep.rows[r].p_hat <= rep.rows[r].m_hat + 2.0 * rep.rows[r].se;
        if (!rep.rows[r].ok) rep.all_ok = false;
    }
    return rep;
}

} // namespace mnic
