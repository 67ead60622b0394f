// Acceptance suite. Each criterion prints exactly one [PASS]/[FAIL] line
// and the process exits nonzero if any criterion fails or overruns its
// time budget. Tolerances and thresholds are pinned here on purpose: a
// change that moves them has to edit this file and show up in review.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mnic/driver.hpp"
#include "mnic/genmodels.hpp"
#include "mnic/interpolator.hpp"
#include "mnic/kernels.hpp"
#include "mnic/linalg.hpp"
#include "mnic/regret.hpp"
#include "mnic/rng.hpp"
#include "mnic/separation.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mnic;

namespace {

struct Outcome {
    bool ok = true;
    std::string note;  // shown on the line either way
};

// |a - b| <= tol * max(1, |a|, |b|)
bool close(double a, double b, double tol) {
    return std::fabs(a - b) <=
           tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// States built online in criteria 1 and 2, re-screened by criterion 4.
std::vector<Interpolator> pool;
NormGrowthTrace growth;  // built by criterion 5, read by criterion 6

KernelSpec gaussian_kernel(double bw) {
    KernelSpec k;
    k.kind = KernelKind::Gaussian;
    k.bandwidth = bw;
    return k;
}

GenerativeModelSpec gmm_model(double mu, double psi) {
    GenerativeModelSpec m;
    m.kind = ModelKind::GmmGaussian;
    m.mu = mu;
    m.psi = psi;
    return m;
}

// 1. The per-step identity epsilon^2 = s^2 * (norm_sq increment), on 200
// random streams through a Gaussian kernel.
Outcome c1_error_identity() {
    const double tol = 1e-8;
    std::size_t steps = 0;
    for (std::size_t s = 0; s < 200; ++s) {
        Rng rng = make_rng(derive_seed(41000, s));
        Dataset data = testutil::random_pm1_dataset(30, 4, rng);
        Interpolator it(gaussian_kernel(1.3));
        for (std::size_t i = 0; i < data.size(); ++i)
            it.step(data.points[i], data.labels[i]);
        for (const StepRecord& rec : it.step_log()) {
            const double lhs = rec.epsilon * rec.epsilon;
            const double rhs = rec.s_sq * rec.norm_increment;
            if (!close(lhs, rhs, tol))
                return {false, "stream " + std::to_string(s) + ": eps^2 " +
                                   fmt(lhs) + " vs s^2*dnorm " + fmt(rhs)};
            ++steps;
        }
        pool.push_back(std::move(it));
    }
    return {true, std::to_string(steps) + " steps within 1e-8"};
}

// 2. Online state equals the batch solve: dual and norm_sq to 1e-8, over
// lambda in {0, 0.1, 10}.
Outcome c2_online_batch() {
    const double lambdas[3] = {0.0, 0.1, 10.0};
    const double tol = 1e-8;
    for (std::size_t i = 0; i < 100; ++i) {
        const double lambda = lambdas[i % 3];
        Rng rng = make_rng(derive_seed(42000, i));
        const std::size_t n = 5 + static_cast<std::size_t>(rng() % 46);
        Dataset data = testutil::random_pm1_dataset(n, 3, rng);
        const KernelSpec kernel = gaussian_kernel(1.1);
        Interpolator online(kernel, lambda);
        for (std::size_t j = 0; j < n; ++j)
            online.step(data.points[j], data.labels[j]);
        Interpolator batch = fit_batch(kernel, data, lambda);
        if (!close(online.norm_sq(), batch.norm_sq(), tol))
            return {false, "instance " + std::to_string(i) + ": norm_sq " +
                               fmt(online.norm_sq()) + " vs " +
                               fmt(batch.norm_sq())};
        for (std::size_t j = 0; j < n; ++j)
            if (!close(online.dual()[j], batch.dual()[j], tol))
                return {false, "instance " + std::to_string(i) +
                                   ": dual mismatch at " + std::to_string(j)};
        pool.push_back(std::move(online));
    }
    return {true, "100 instances, lambda in {0, 0.1, 10}"};
}

// 3. Feature-space recursion matches an explicit QR reconstruction at every
// prefix, and the averaged dual matches the mean of the prefix fits.
Outcome c3_qr_polyak() {
    const double tol = 1e-8;
    for (std::size_t inst = 0; inst < 25; ++inst) {
        Rng rng = make_rng(derive_seed(43000, inst));
        const std::size_t n = 4 + inst % 12;
        const std::size_t p = std::min<std::size_t>(20, n + 2 + inst % 5);
        Dataset data = testutil::random_pm1_dataset(n, p, rng);

        FeatureInterpolator fi(p);
        std::vector<Vec> betas;
        for (std::size_t k = 0; k < n; ++k) {
            fi.step(data.points[k], data.labels[k]);
            betas.push_back(fi.beta());
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<Vec> rows(data.points.begin(),
                                  data.points.begin() + k + 1);
            oracle::QrRows qr = oracle::gram_schmidt_rows(rows);
            // solve R^T z = y (forward substitution), beta = sum z_i q_i
            Vec z(k + 1, 0.0);
            for (std::size_t i = 0; i <= k; ++i) {
                double acc = data.labels[i];
                for (std::size_t j = 0; j < i; ++j) acc -= qr.r(j, i) * z[j];
                z[i] = acc / qr.r(i, i);
            }
            Vec beta(p, 0.0);
            for (std::size_t i = 0; i <= k; ++i) axpy(z[i], qr.q[i], beta);
            for (std::size_t c = 0; c < p; ++c)
                if (!close(betas[k][c], beta[c], tol))
                    return {false, "instance " + std::to_string(inst) +
                                       ": beta prefix " + std::to_string(k)};
        }

        // kernel-side averaged dual vs the mean of dense prefix refits
        KernelSpec lin;  // linear
        Interpolator it(lin);
        for (std::size_t k = 0; k < n; ++k)
            it.step(data.points[k], data.labels[k]);
        for (std::size_t q = 0; q < 20; ++q) {
            Vec probe = testutil::random_vec(p, rng);
            double avg = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                std::vector<Vec> pts(data.points.begin(),
                                     data.points.begin() + k);
                Mat K = gram(lin, pts);
                Vec y(data.labels.begin(), data.labels.begin() + k);
                Vec alpha = oracle::dense_solve(K, y);
                double pred = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                    pred += alpha[i] * dot(pts[i], probe);
                avg += pred;
            }
            avg /= static_cast<double>(n);
            if (!close(it.predict_polyak(probe), avg, tol))
                return {false, "instance " + std::to_string(inst) +
                                   ": averaged prediction at probe " +
                                   std::to_string(q)};
        }
    }
    return {true, "25 instances, every prefix and 20 probes"};
}

// 4. r_n^2 B_n^2 <= sum eps_i^2 <= R_n^2 B_n^2 and mistakes <= R_n^2 B_n^2
// on every state from criteria 1 and 2 plus 50 fresh mixture streams.
Outcome c4_regret_pinch() {
    const double rel = 1e-6;
    GenerativeModelSpec model = gmm_model(2.0, 2.0);
    KernelSpec lin;
    std::size_t screened = 0;
    auto screen = [&](const Interpolator& state,
                      const std::string& tag) -> std::string {
        RegretReport rep = build_report(state);
        const double slack = rel * std::max(1.0, rep.upper_bound);
        if (rep.lower_bound > rep.sq_loss + slack)
            return tag + ": lower " + fmt(rep.lower_bound) + " > loss " +
                   fmt(rep.sq_loss);
        if (rep.sq_loss > rep.upper_bound + slack)
            return tag + ": loss " + fmt(rep.sq_loss) + " > upper " +
                   fmt(rep.upper_bound);
        if (static_cast<double>(rep.mistakes) > rep.upper_bound + slack)
            return tag + ": mistakes " + std::to_string(rep.mistakes) +
                   " > upper " + fmt(rep.upper_bound);
        ++screened;
        return "";
    };
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::string err = screen(pool[i], "pool " + std::to_string(i));
        if (!err.empty()) return {false, err};
    }
    for (std::size_t t = 0; t < 50; ++t) {
        Rng rng = make_rng(derive_seed(44000, t));
        Dataset data = sample(model, 100, rng);
        Interpolator it(lin);
        for (std::size_t j = 0; j < data.size(); ++j)
            it.step(data.points[j], data.labels[j]);
        std::string err = screen(it, "mixture " + std::to_string(t));
        if (!err.empty()) return {false, err};
    }
    return {true, std::to_string(screened) + " states pinched"};
}

// 5. Mixture norm plateau: at n = 400, psi = 2, mu = 2, the mean squared
// norm stays within 25 percent of the 0.5 limit.
Outcome c5_norm_plateau() {
    growth = norm_growth_experiment(gmm_model(2.0, 2.0), KernelSpec{},
                                    {100, 200, 400}, 20, 45000);
    const TraceRow& row = growth.rows.back();
    if (row.n != 400) return {false, "grid tail is not n=400"};
    if (!(row.norm_mean <= 0.625))
        return {false, "mean norm_sq " + fmt(row.norm_mean) + " > 0.625"};
    return {true, "mean norm_sq " + fmt(row.norm_mean) + " <= 0.625"};
}

// 6. Mixture mistake plateau: same runs, mean cumulative mistakes at
// n = 400 stay below the limiting bound 4.5.
Outcome c6_mistake_plateau() {
    if (growth.rows.empty()) return {false, "no shared growth data"};
    const TraceRow& row = growth.rows.back();
    if (!(row.mistakes_mean <= 4.5))
        return {false, "mean mistakes " + fmt(row.mistakes_mean) + " > 4.5"};
    return {true, "mean mistakes " + fmt(row.mistakes_mean) + " <= 4.5"};
}

// 7. Held-out risk sits below the regret-derived bound, for both the final
// and the averaged predictor, within two standard errors.
Outcome c7_generalization() {
    GeneralizationEstimate est = estimate_generalization(
        gmm_model(2.0, 2.0), KernelSpec{}, 0.0, {200}, 50, 2000, 46000);
    const GeneralizationRow& r = est.rows.front();
    const double final_cap =
        r.bound + 2.0 * (r.bound_se + r.est_final_risk_se);
    if (!(r.est_final_risk <= final_cap))
        return {false, "final risk " + fmt(r.est_final_risk) + " > " +
                           fmt(final_cap)};
    const double polyak_cap =
        r.polyak_bound + 2.0 * (r.polyak_bound_se + r.est_polyak_risk_se);
    if (!(r.est_polyak_risk <= polyak_cap))
        return {false, "averaged risk " + fmt(r.est_polyak_risk) + " > " +
                           fmt(polyak_cap)};
    return {true, "risk " + fmt(r.est_final_risk) + " <= bound " +
                      fmt(r.bound) + ", averaged " + fmt(r.est_polyak_risk) +
                      " <= " + fmt(r.polyak_bound)};
}

// 8. Conditional norm bound: with labels redrawn from the conditional
// class probabilities, the mean squared norm stays below
// cap^2 + (1/r_n^2) sum_i (1 - eta_i^2) within two standard errors.
Outcome c8_conditional_norm() {
    GenerativeModelSpec model = gmm_model(1.0, 0.0);
    model.dim = 300;
    Rng rng = make_rng(47000);
    Dataset data = sample(model, 100, rng);
    KernelSpec lin;
    Mat K = gram(lin, data.points);
    Vec loo = loo_distances(K);
    const double rmin = *std::min_element(loo.begin(), loo.end());
    const double r_n_sq = rmin * rmin;
    const double cap = 5.0;  // configured eta cap, cap^2 = 25
    const double bound = conditional_norm_bound(cap, r_n_sq, model, data.points);
    ConditionalNormEstimate est =
        conditional_norm_mc(model, data.points, lin, 200, 47001);
    if (!(est.mean <= bound + 2.0 * est.se))
        return {false, "mean norm_sq " + fmt(est.mean) + " > bound " +
                           fmt(bound) + " + 2se " + fmt(est.se)};
    return {true, "mean norm_sq " + fmt(est.mean) + " <= " + fmt(bound)};
}

// 9. Closed-form separation quantities: exact values where the algebra is
// exact, quadrature agreement for the Gaussian overlap.
Outcome c9_separation_forms() {
    if (tsybakov_bayes_bound(1.0, 7.0) != 0.0)
        return {false, "margin bound at alpha=1 not exactly 0"};
    if (tsybakov_bayes_bound(0.0, 1.0) != 1.0)
        return {false, "margin bound at alpha=0, c0=1 not exactly 1"};
    if (tv_separation_prob(1.0, 17, 0.05) != 1.0)
        return {false, "separation probability at tv=1 not exactly 1"};
    const double mus[3] = {1.0, 0.5, 2.0};
    const std::size_t ds[3] = {4, 16, 1};
    for (int i = 0; i < 3; ++i) {
        const double impl = gaussian_mixture_tv(mus[i], ds[i]);
        const double ref =
            oracle::tv_quadrature(mus[i], 1.0 / std::sqrt(double(ds[i])));
        if (std::fabs(impl - ref) > 1e-6)
            return {false, "tv(" + fmt(mus[i]) + ", d=" +
                               std::to_string(ds[i]) + ") off by " +
                               fmt(std::fabs(impl - ref))};
    }
    return {true, "exact identities and 3 quadrature matches"};
}

// 10. Phase region classifier: pinned examples plus monotonicity in the
// norm exponent across a 50 x 50 grid.
Outcome c10_region() {
    if (region_classify(2.0, 1.5, 0.3, false) != Region::DecayingInterpolation)
        return {false, "(2.0, 1.5) should be decaying interpolation"};
    if (region_classify(0.3, 2.0, 0.3, true) != Region::Unknown)
        return {false, "(0.3, 2.0) should be unknown"};
    if (region_classify(1.2, 2.0, 0.3, true) != Region::DecayingInterpolation)
        return {false, "(1.2, 2.0) should be decaying interpolation"};
    for (std::size_t iy = 0; iy < 50; ++iy) {
        const double y = 1.05 + (3.0 - 1.05) * double(iy) / 49.0;
        bool seen = false;
        for (std::size_t ix = 0; ix < 50; ++ix) {
            const double x = 0.05 + (3.0 - 0.05) * double(ix) / 49.0;
            const bool interp = region_classify(x, y, 0.3, false) ==
                                Region::DecayingInterpolation;
            if (seen && !interp)
                return {false, "interpolation region not upward closed at (" +
                                   fmt(x) + ", " + fmt(y) + ")"};
            seen = seen || interp;
        }
    }
    return {true, "3 pinned examples, monotone on 50x50 grid"};
}

// 11. Re-running the same config writes byte-identical primary tables.
Outcome c11_determinism() {
    const fs::path base = fs::temp_directory_path() / "mnic_acceptance";
    std::error_code ec;
    fs::remove_all(base, ec);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    ExperimentConfig cfg;
    cfg.command = "simulate-gmm";
    cfg.model = gmm_model(2.0, 2.0);
    cfg.n_grid = {20, 40};
    cfg.trials = 3;
    cfg.seed = 48000;
    cfg.output_dir = (base / "a").string();
    if (run_experiment(cfg) != 0) return {false, "first run failed"};
    cfg.output_dir = (base / "b").string();
    if (run_experiment(cfg) != 0) return {false, "second run failed"};
    for (const char* name : {"norm_growth.csv", "r_n_fit.csv"}) {
        const std::string a = slurp(base / "a" / name);
        const std::string b = slurp(base / "b" / name);
        if (a.empty() || a != b)
            return {false, std::string(name) + " differs between reruns"};
    }

    ExperimentConfig reg;
    reg.command = "region-map";
    reg.region_alpha = 0.3;
    reg.region_grid_x = 12;
    reg.region_grid_y = 12;
    reg.seed = 1;
    reg.output_dir = (base / "ra").string();
    if (run_experiment(reg) != 0) return {false, "region run failed"};
    reg.output_dir = (base / "rb").string();
    if (run_experiment(reg) != 0) return {false, "region rerun failed"};
    const std::string ra = slurp(base / "ra" / "region_map.csv");
    const std::string rb = slurp(base / "rb" / "region_map.csv");
    if (ra.empty() || ra != rb)
        return {false, "region_map.csv differs between reruns"};
    return {true, "simulate-gmm and region-map byte identical"};
}

}  // namespace

int main() {
    struct Entry {
        int idx;
        const char* name;
        double budget_s;
        std::function<Outcome()> fn;
    };
    const Entry entries[] = {
        {1, "per-step error identity", 10.0, c1_error_identity},
        {2, "online matches batch", 10.0, c2_online_batch},
        {3, "feature path and averaged predictor", 5.0, c3_qr_polyak},
        {4, "regret pinch and mistake cap", 30.0, c4_regret_pinch},
        {5, "gmm norm plateau", 120.0, c5_norm_plateau},
        {6, "gmm mistake plateau", 120.0, c6_mistake_plateau},
        {7, "generalization bound vs test risk", 180.0, c7_generalization},
        {8, "conditional norm bound", 60.0, c8_conditional_norm},
        {9, "separation closed forms", 1.0, c9_separation_forms},
        {10, "phase region classifier", 1.0, c10_region},
        {11, "rerun determinism", 60.0, c11_determinism},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        if (out.ok && secs > e.budget_s) {
            out.ok = false;
            out.note = "over time budget of " + fmt(e.budget_s) + " s";
        }
        std::printf("[%s] %2d %-38s %7.2fs  %s\n", out.ok ? "PASS" : "FAIL",
                    e.idx, e.name, secs, out.note.c_str());
        std::fflush(stdout);
        if (!out.ok) ++failures;
    }
    if (failures == 0) {
        std::printf("all 11 criteria passed\n");
        return 0;
    }
    std::printf("%d of 11 criteria failed\n", failures);
    return 1;
}
