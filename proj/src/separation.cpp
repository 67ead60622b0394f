#include "mnic/separation.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "mnic/interpolator.hpp"
#include "mnic/linalg.hpp"

namespace mnic {

namespace {

double std_normal_cdf(double z) {
    return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0)));
}

// Inverse covariance applied inside theta^T Sigma^{-1} x for the tanh form.
// The Gaussian kind has Sigma = I/d; the general kind is diagonal by its
// spectrum.
double likelihood_exponent(const GenerativeModelSpec& model,
                           std::span<const double> x) {
    if (model.noise != NoiseKind::Gaussian)
        throw std::invalid_argument("eta: closed form needs Gaussian noise");
    const std::size_t d = x.size();
    if (model.kind == ModelKind::GmmGaussian) {
        double th_x = 0.0;
        if (model.theta_star.empty()) {
            th_x = x[0];
        } else {
            if (model.theta_star.size() != d)
                throw std::invalid_argument("eta: theta_star length mismatch");
            const double nrm = std::sqrt(norm_sq(model.theta_star));
            for (std::size_t i = 0; i < d; ++i)
                th_x += model.theta_star[i] / nrm * x[i];
        }
        return static_cast<double>(d) * model.mu * th_x;
    }
    const Vec lam = model.spectrum.realize(d);
    double acc = 0.0;
    if (model.theta_star.empty()) {
        acc = x[0] / lam[0];
    } else {
        if (model.theta_star.size() != d)
            throw std::invalid_argument("eta: theta_star length mismatch");
        const double nrm = std::sqrt(norm_sq(model.theta_star));
        for (std::size_t i = 0; i < d; ++i)
            acc += model.theta_star[i] / nrm * x[i] / lam[i];
    }
    return model.mu * acc;
}

} // namespace

double eta_star(const GenerativeModelSpec& model, std::span<const double> x) {
    return std::tanh(likelihood_exponent(model, x));
}

double bayes_error(const GenerativeModelSpec& model, const std::vector<Vec>& X) {
    if (X.empty())
        throw std::invalid_argument("bayes error: empty sample");
    double acc = 0.0;
    for (const Vec& x : X) {
        const double e = eta_star(model, x);
        acc += 1.0 - e * e;
    }
    return acc / static_cast<double>(X.size());
}

double conditional_norm_bound(double eta_cap, double r_n_sq,
                              const GenerativeModelSpec& model,
                              const std::vector<Vec>& X) {
    if (!(eta_cap >= 0.0))
        throw std::invalid_argument("norm bound: cap must be >= 0");
    if (!(r_n_sq > 0.0))
        throw std::invalid_argument("norm bound: r_n_sq must be positive");
    double sum = 0.0;
    for (const Vec& x : X) {
        const double e = eta_star(model, x);
        sum += 1.0 - e * e;
    }
    return eta_cap * eta_cap + sum / r_n_sq;
}

double tsybakov_bayes_bound(double alpha, double c0) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("margin bound: alpha must lie in [0, 1]");
    if (!(c0 >= 0.0))
        throw std::invalid_argument("margin bound: c0 must be >= 0");
    return c0 * 2.0 * (1.0 - alpha) / (2.0 - alpha);
}

double tv_separation_prob(double tv, std::size_t n, double epsilon) {
    if (!(tv >= 0.0 && tv <= 1.0))
        throw std::invalid_argument("separation prob: tv must lie in [0, 1]");
    if (n == 0)
        throw std::invalid_argument("separation prob: n must be positive");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("separation prob: epsilon must be positive");
    return 1.0 - ((1.0 / epsilon + 1.0) / 2.0) * static_cast<double>(n) * (1.0 - tv);
}

double gaussian_mixture_tv(const GenerativeModelSpec& model) {
    if (model.noise != NoiseKind::Gaussian)
        throw std::invalid_argument("tv: closed form needs Gaussian noise");
    std::size_t d = model.dim;
    if (d == 0)
        throw std::invalid_argument("tv: model needs an explicit dimension");
    double quad;  // theta^T Sigma^{-1} theta
    if (model.kind == ModelKind::GmmGaussian) {
        quad = static_cast<double>(d);
    } else {
        const Vec lam = model.spectrum.realize(d);
        Vec theta(d, 0.0);
        if (model.theta_star.empty()) {
            theta[0] = 1.0;
        } else {
            if (model.theta_star.size() != d)
                throw std::invalid_argument("tv: theta_star length mismatch");
            const double nrm = std::sqrt(norm_sq(model.theta_star));
            for (std::size_t i = 0; i < d; ++i) theta[i] = model.theta_star[i] / nrm;
        }
        quad = 0.0;
        for (std::size_t i = 0; i < d; ++i) quad += theta[i] * theta[i] / lam[i];
    }
    return 2.0 * std_normal_cdf(model.mu * std::sqrt(quad)) - 1.0;
}

double gaussian_mixture_tv(double mu, std::size_t d) {
    if (!(mu >= 0.0))
        throw std::invalid_argument("tv: mu must be >= 0");
    if (d == 0)
        throw std::invalid_argument("tv: dimension must be positive");
    return 2.0 * std_normal_cdf(mu * std::sqrt(static_cast<double>(d))) - 1.0;
}

double gaussian_mixture_tv_exp_form(double mu, std::size_t d) {
    return 1.0 - std::exp(-static_cast<double>(d) * mu * mu / 2.0);
}

ConditionalNormEstimate conditional_norm_mc(const GenerativeModelSpec& model,
                                            const std::vector<Vec>& X,
                                            const KernelSpec& kernel,
                                            std::size_t redraws,
                                            std::uint64_t seed) {
    if (redraws == 0)
        throw std::invalid_argument("norm mc: redraws must be positive");
    if (X.empty())
        throw std::invalid_argument("norm mc: empty sample");

    Vec etas(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) etas[i] = eta_star(model, X[i]);

    Vec norms(redraws, 0.0);
    std::vector<std::string> errs(redraws);
    std::vector<char> deficient(redraws, 0);
    Vec schur(redraws, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(redraws); ++r) {
        const auto ur = static_cast<std::size_t>(r);
        try {
            Rng rng = make_rng(derive_seed(seed, ur));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            Dataset data;
            data.points = X;
            data.labels.resize(X.size());
            for (std::size_t i = 0; i < X.size(); ++i)
                data.labels[i] = u(rng) < (1.0 + etas[i]) / 2.0 ? 1.0 : -1.0;
            const Interpolator fit = fit_batch(kernel, data, 0.0);
            norms[ur] = fit.norm_sq();
        } catch (const RankDeficientError& e) {
            deficient[ur] = 1;
            schur[ur] = e.schur_sq();
            errs[ur] = e.what();
        } catch (const std::exception& e) {
            errs[ur] = e.what();
        }
    }
    for (std::size_t r = 0; r < redraws; ++r) {
        if (errs[r].empty()) continue;
        if (deficient[r]) throw RankDeficientError(schur[r], errs[r]);
        throw std::runtime_error("norm mc: redraw failed: " + errs[r]);
    }

    const double n = static_cast<double>(redraws);
    double mean = 0.0;
    for (double v : norms) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : norms) ss += (v - mean) * (v - mean);
    const double sd = redraws > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return {mean, sd / std::sqrt(n), redraws};
}

SeparationReport separation_report(const GenerativeModelSpec& model,
                                   std::size_t n, double eta_cap,
                                   double epsilon, std::uint64_t seed,
                                   std::size_t redraws) {
    if (n == 0)
        throw std::invalid_argument("separation report: n must be positive");
    GenerativeModelSpec fixed = model;
    if (fixed.dim == 0) fixed.dim = fixed.ambient_dim(n);

    Rng rng = make_rng(derive_seed(seed, 0));
    const Dataset data = sample(fixed, n, rng);

    KernelSpec linear;
    linear.kind = KernelKind::Linear;
    const Mat K = gram(linear, data.points);
    const Vec loo = loo_distances(K);
    double rmin = loo.front();
    for (double s : loo) rmin = std::min(rmin, s);

    SeparationReport rep{};
    rep.n = n;
    rep.eta_cap = eta_cap;
    rep.epsilon = epsilon > 0.0 ? epsilon : 1.0 / static_cast<double>(n);
    rep.r_n_sq = rmin * rmin;
    rep.bayes_err = bayes_error(fixed, data.points);
    rep.tv = gaussian_mixture_tv(fixed);
    if (fixed.kind == ModelKind::GmmGaussian)
        rep.tv_exp_form = gaussian_mixture_tv_exp_form(fixed.mu, fixed.dim);
    else
        rep.tv_exp_form = std::numeric_limits<double>::quiet_NaN();
    rep.cond_norm_bound = conditional_norm_bound(eta_cap, rep.r_n_sq, fixed,
                                                 data.points);
    rep.separation_prob = tv_separation_prob(rep.tv, n, rep.epsilon);
    rep.redraws = redraws;
    if (redraws > 0) {
        const ConditionalNormEstimate est = conditional_norm_mc(
            fixed, data.points, linear, redraws, derive_seed(seed, 1));
        rep.norm_mc_mean = est.mean;
        rep.norm_mc_se = est.se;
    } else {
        rep.norm_mc_mean = std::numeric_limits<double>::quiet_NaN();
        rep.norm_mc_se = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

} // namespace mnic
