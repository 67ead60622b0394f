#include "mnic/genmodels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mnic {

Vec SpectrumSpec::realize(std::size_t p) const {
    Vec lam(p);
    switch (kind) {
    case SpectrumKind::Flat:
        if (!(value > 0.0))
            throw std::invalid_argument("spectrum: flat value must be positive");
        std::fill(lam.begin(), lam.end(), value);
        break;
    case SpectrumKind::PowerLaw:
        if (!(alpha >= 0.0))
            throw std::invalid_argument("spectrum: power-law exponent must be >= 0");
        for (std::size_t i = 0; i < p; ++i)
            lam[i] = std::pow(static_cast<double>(i + 1), -alpha);
        break;
    case SpectrumKind::Explicit:
        if (values.size() != p)
            throw std::invalid_argument("spectrum: explicit list length must equal p");
        for (std::size_t i = 0; i < p; ++i) {
            if (!(values[i] > 0.0))
                throw std::invalid_argument("spectrum: eigenvalues must be positive");
            if (i > 0 && values[i] > values[i - 1])
                throw std::invalid_argument("spectrum: eigenvalues must be non-increasing");
            lam[i] = values[i];
        }
        break;
    }
    return lam;
}

void GenerativeModelSpec::validate() const {
    if (!(mu >= 0.0))
        throw std::invalid_argument("model: mu must be >= 0");
    if (dim == 0 && !(psi > 0.0))
        throw std::invalid_argument("model: need an explicit dimension or psi > 0");
    if (noise == NoiseKind::StudentT && !(student_dof > 2.0))
        throw std::invalid_argument("model: student-t dof must exceed 2");
    if (!theta_star.empty()) {
        const double nrm = std::sqrt(norm_sq(theta_star));
        if (!(nrm > 0.0))
            throw std::invalid_argument("model: theta_star must be nonzero");
    }
    if (kind == ModelKind::GmmGaussian && noise != NoiseKind::Gaussian)
        throw std::invalid_argument("model: the Gaussian mixture kind has Gaussian noise");
}

std::size_t GenerativeModelSpec::ambient_dim(std::size_t n) const {
    if (dim > 0) return dim;
    return static_cast<std::size_t>(std::ceil(psi * static_cast<double>(n)));
}

namespace {

Vec unit_direction(const GenerativeModelSpec& model, std::size_t d) {
    Vec theta(d, 0.0);
    if (model.theta_star.empty()) {
        theta[0] = 1.0;
        return theta;
    }
    if (model.theta_star.size() != d)
        throw std::invalid_argument("model: theta_star length does not match dimension");
    const double nrm = std::sqrt(norm_sq(model.theta_star));
    for (std::size_t i = 0; i < d; ++i) theta[i] = model.theta_star[i] / nrm;
    return theta;
}

double draw_unit_noise(NoiseKind kind, double dof, Rng& rng) {
    switch (kind) {
    case NoiseKind::Gaussian: {
        std::normal_distribution<double> g(0.0, 1.0);
        return g(rng);
    }
    case NoiseKind::Rademacher:
        return (rng() & 1u) ? 1.0 : -1.0;
    case NoiseKind::StudentT: {
        std::student_t_distribution<double> t(dof);
        // Standardized to unit variance; dof > 2 is enforced at validate().
        return t(rng) / std::sqrt(dof / (dof - 2.0));
    }
    }
    throw std::logic_error("model: unreachable noise kind");
}

// Haar-ish random rotation via Gram-Schmidt of a Gaussian matrix. Only used
// when the rotate flag is set; cost is O(p^3).
Mat random_rotation(std::size_t p, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat Q(p, p);
    for (auto& v : Q.data()) v = g(rng);
    // Orthonormalize columns in place.
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0.0;
            for (std::size_t i = 0; i < p; ++i) proj += Q(i, k) * Q(i, j);
            for (std::size_t i = 0; i < p; ++i) Q(i, j) -= proj * Q(i, k);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < p; ++i) nrm += Q(i, j) * Q(i, j);
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < p; ++i) Q(i, j) /= nrm;
    }
    return Q;
}

} // namespace

Dataset sample(const GenerativeModelSpec& model, std::size_t n, Rng& rng) {
    model.validate();
    const std::size_t d = model.ambient_dim(n);
    const Vec theta = unit_direction(model, d);

    Dataset data;
    data.points.reserve(n);
    data.labels.reserve(n);

    std::normal_distribution<double> g(0.0, 1.0);
    const bool gmm = model.kind == ModelKind::GmmGaussian;
    Vec sqrt_lam;
    Mat rot;
    if (!gmm) {
        const Vec lam = model.spectrum.realize(d);
        sqrt_lam.resize(d);
        for (std::size_t i = 0; i < d; ++i) sqrt_lam[i] = std::sqrt(lam[i]);
        if (model.rotate) rot = random_rotation(d, rng);
    }
    const double noise_scale = gmm ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double y = (rng() & 1u) ? 1.0 : -1.0;
        Vec x(d);
        if (gmm) {
            for (std::size_t j = 0; j < d; ++j)
                x[j] = y * model.mu * theta[j] + noise_scale * g(rng);
        } else {
            for (std::size_t j = 0; j < d; ++j)
                x[j] = y * model.mu * theta[j] +
                       sqrt_lam[j] * draw_unit_noise(model.noise, model.student_dof, rng);
            if (model.rotate) {
                Vec rx(d, 0.0);
                for (std::size_t r = 0; r < d; ++r)
                    for (std::size_t c = 0; c < d; ++c)
                        rx[r] += rot(r, c) * x[c];
                x = std::move(rx);
            }
        }
        data.points.push_back(std::move(x));
        data.labels.push_back(y);
    }
    return data;
}

double gmm_norm_limit(double mu, double psi) {
    if (!(mu > 0.0))
        throw std::invalid_argument("norm limit: mu must be positive");
    if (!(psi > 1.0))
        throw std::invalid_argument("norm limit: psi must exceed 1");
    return psi / ((psi - 1.0) * mu * mu);
}

double gmm_mistake_limit(double mu, double psi) {
    return (mu + 1.0) * (mu + 1.0) * gmm_norm_limit(mu, psi);
}

MixtureBoundParts mixture_regret_bound(const GenerativeModelSpec& model,
                                       std::size_t n, double lambda,
                                       const BoundConstants& c) {
    if (model.kind != ModelKind::GeneralMixture)
        throw std::invalid_argument("mixture bound: general mixture model required");
    if (n == 0)
        throw std::invalid_argument("mixture bound: n must be positive");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("mixture bound: lambda must be >= 0");
    model.validate();

    const std::size_t p = model.ambient_dim(n);
    const Vec lam = model.spectrum.realize(p);
    const Vec theta = unit_direction(model, p);

    MixtureBoundParts parts{};
    parts.mu_sq = model.mu * model.mu;
    parts.trace = 0.0;
    for (double v : lam) parts.trace += v;
    parts.theta_cov_theta = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        parts.theta_cov_theta += theta[i] * theta[i] * lam[i];

    const double m = model.noise == NoiseKind::StudentT
                         ? model.student_dof
                         : std::numeric_limits<double>::infinity();
    const double pd = static_cast<double>(p);
    parts.gamma_p = std::pow(pd, 0.5 + 2.0 / m) * std::pow(std::log(pd), 0.51);

    parts.np_ratio = static_cast<double>(n) / pd;
    parts.lambda_1_eff = lambda / pd + lam.front();
    parts.lambda_p_eff = lambda / pd + lam.back();

    const double lead = c.c1 * (lambda + parts.mu_sq + parts.trace + parts.gamma_p);
    parts.numerator = (1.0 / parts.lambda_p_eff) * parts.np_ratio *
                      (1.0 + c.c2 * (parts.theta_cov_theta / parts.lambda_p_eff) *
                                 parts.np_ratio);
    parts.denominator = 1.0 + c.c3 * ((parts.mu_sq + parts.theta_cov_theta) /
                                      parts.lambda_1_eff) *
                                  parts.np_ratio;
    parts.value = lead * parts.numerator / parts.denominator /
                  static_cast<double>(n);
    return parts;
}

Region region_classify(double x_exp, double y_exp, double alpha,
                       bool allow_ridge) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::invalid_argument("region: alpha must lie in (0, 1/2)");
    if (!(y_exp > 1.0))
        throw std::invalid_argument("region: y exponent must exceed 1");
    if (!(x_exp > 0.0))
        throw std::invalid_argument("region: x exponent must be positive");

    // All comparisons are between polynomial orders in n: mu^2 = n^x,
    // p = n^y, tr(Sigma) ~ p^{1-alpha}. A product of powers of p and 1/n is
    // vanishing when its exponent is negative; the inclusive comparisons
    // keep boundary lines inside the region they border.
    const double tr = (1.0 - alpha) * y_exp;   // exponent of tr(Sigma)
    const double ay = alpha * y_exp;           // exponent of p^alpha

    // Strong signal, mu^2 above the trace: vanishing either when n sits
    // between p^alpha and p^{1-alpha} or between p^{1-alpha} and p.
    const bool strong_low = x_exp >= tr && tr >= 1.0 && ay <= 1.0;
    const bool strong_high = x_exp >= tr && y_exp >= 1.0 && tr <= 1.0;

    // Intermediate signal, mu^2 between max(p/n, p^alpha) and the trace;
    // the two branches split on n against p^{1-alpha}.
    const double floor_exp = std::max(y_exp - 1.0, ay);
    const bool mid_low = x_exp >= floor_exp && x_exp <= tr && tr >= 1.0;
    const bool mid_high = x_exp >= floor_exp && x_exp <= tr && tr <= 1.0;

    if (strong_low || strong_high || mid_low || mid_high)
        return Region::DecayingInterpolation;

    if (allow_ridge) {
        const bool over = x_exp >= y_exp - 1.0 && ay >= 1.0;
        const bool weak = x_exp >= y_exp - 1.0 && ay >= x_exp;
        if (over || weak) return Region::DecayingRidge;
    }
    return Region::Unknown;
}

const char* region_name(Region r) {
    switch (r) {
    case Region::DecayingInterpolation: return "decaying_interpolation";
    case Region::DecayingRidge: return "decaying_ridge";
    case Region::Unknown: return "unknown";
    }
    return "unknown";
}

namespace {

struct StreamStats {
    bool ok = false;
    bool rank_deficient = false;
    double schur_sq = 0.0;
    std::string error;
    double norm_sq = 0.0;
    double mistakes = 0.0;
    double r_n_sq = 0.0;
};

[[noreturn]] void rethrow_stream_failure(const StreamStats& st,
                                         const std::string& prefix) {
    if (st.rank_deficient) throw RankDeficientError(st.schur_sq, st.error);
    throw std::runtime_error(prefix + st.error);
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const Vec& v) {
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

NormGrowthTrace norm_growth_experiment(const GenerativeModelSpec& model,
                                       const KernelSpec& kernel,
                                       const std::vector<std::size_t>& n_grid,
                                       std::size_t trials, std::uint64_t seed,
                                       RankPolicy policy, double lambda) {
    if (trials == 0)
        throw std::invalid_argument("norm growth: trials must be positive");
    model.validate();

    NormGrowthTrace trace;
    trace.trials = trials;

    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const std::size_t n = n_grid[gi];
        if (gi > 0 && n <= n_grid[gi - 1])
            throw std::invalid_argument("norm growth: n grid must be strictly increasing");

        std::vector<StreamStats> per_trial(trials);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            const auto ut = static_cast<std::size_t>(t);
            StreamStats& st = per_trial[ut];
            try {
                Rng rng = make_rng(derive_seed(seed, n, ut));
                const Dataset data = sample(model, n, rng);
                Interpolator state(kernel, lambda, policy);
                double mistakes = 0.0;
                for (std::size_t i = 0; i < data.size(); ++i) {
                    const StepResult r = state.step(data.points[i], data.labels[i]);
                    if (r.skipped) continue;
                    const double pred = data.labels[i] - r.epsilon;
                    if (data.labels[i] * pred <= 0.0) mistakes += 1.0;
                }
                st.norm_sq = state.norm_sq();
                st.mistakes = mistakes;
                st.ok = true;
            } catch (const RankDeficientError& e) {
                st.rank_deficient = true;
                st.schur_sq = e.schur_sq();
                st.error = e.what();
            } catch (const std::exception& e) {
                st.error = e.what();
            }
        }

        for (const StreamStats& st : per_trial)
            if (!st.ok) rethrow_stream_failure(st, "norm growth: trial failed: ");

        Vec norms(trials), mists(trials);
        for (std::size_t t = 0; t < trials; ++t) {
            norms[t] = per_trial[t].norm_sq;
            mists[t] = per_trial[t].mistakes;
        }
        const MeanSe nm = mean_se(norms);
        const MeanSe mm = mean_se(mists);

        TraceRow row{};
        row.n = n;
        row.norm_mean = nm.mean;
        row.norm_se = nm.se;
        row.mistakes_mean = mm.mean;
        row.mistakes_se = mm.se;
        if (model.kind == ModelKind::GmmGaussian && model.mu > 0.0 &&
            model.psi > 1.0) {
            row.theory_norm = gmm_norm_limit(model.mu, model.psi);
            row.theory_mistakes = gmm_mistake_limit(model.mu, model.psi);
        } else if (model.kind == ModelKind::GeneralMixture) {
            row.theory_norm = std::numeric_limits<double>::quiet_NaN();
            row.theory_mistakes =
                mixture_regret_bound(model, n, lambda).value * static_cast<double>(n);
        } else {
            row.theory_norm = std::numeric_limits<double>::quiet_NaN();
            row.theory_mistakes = std::numeric_limits<double>::quiet_NaN();
        }
        trace.rows.push_back(row);
    }
    return trace;
}

std::vector<RnFitRow> r_n_lower_check(const GenerativeModelSpec& model,
                                      const std::vector<std::size_t>& n_grid,
                                      std::size_t trials, std::uint64_t seed) {
    if (model.kind != ModelKind::GmmGaussian)
        throw std::invalid_argument("r_n check: Gaussian mixture model required");
    if (trials == 0)
        throw std::invalid_argument("r_n check: trials must be positive");
    model.validate();

    KernelSpec linear;
    linear.kind = KernelKind::Linear;

    std::vector<RnFitRow> rows;
    for (std::size_t n : n_grid) {
        std::vector<StreamStats> per_trial(trials);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            const auto ut = static_cast<std::size_t>(t);
            StreamStats& st = per_trial[ut];
            try {
                Rng rng = make_rng(derive_seed(seed, n, ut));
                const Dataset data = sample(model, n, rng);
                const Mat K = gram(linear, data.points);
                const Vec loo = loo_distances(K);
                double rmin = loo.empty() ? 0.0 : loo.front();
                for (double s : loo) rmin = std::min(rmin, s);
                st.r_n_sq = rmin * rmin;
                st.ok = true;
            } catch (const RankDeficientError& e) {
                st.rank_deficient = true;
                st.schur_sq = e.schur_sq();
                st.error = e.what();
            } catch (const std::exception& e) {
                st.error = e.what();
            }
        }
        for (const StreamStats& st : per_trial)
            if (!st.ok) rethrow_stream_failure(st, "r_n check: trial failed: ");

        Vec vals(trials);
        for (std::size_t t = 0; t < trials; ++t) vals[t] = per_trial[t].r_n_sq;
        const MeanSe ms = mean_se(vals);

        RnFitRow row{};
        row.n = n;
        row.r_n_sq_mean = ms.mean;
        row.r_n_sq_se = ms.se;
        row.c_hat = ((model.mu * model.mu + 1.0) / ms.mean - 1.0) /
                    static_cast<double>(n);
        rows.push_back(row);
    }
    return rows;
}

} // namespace mnic
