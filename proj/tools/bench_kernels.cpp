// Timing comparison of the OpenMP kernels against their serial references.
// Every pair must agree bitwise; the table prints the largest observed
// difference alongside the speedup so a regression in either shows up here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "mnic/interpolator.hpp"
#include "mnic/kernels.hpp"
#include "mnic/linalg.hpp"
#include "mnic/rng.hpp"

using namespace mnic;

namespace {

template <typename F>
double best_ms(int repeat, F fn) {
    double best = 1e300;
    for (int r = 0; r < repeat; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(
            best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void print_row(const char* task, double serial_ms, double parallel_ms,
               double max_diff) {
    std::printf("%-14s %12.2f %12.2f %10.2fx %12.3g\n", task, serial_ms,
                parallel_ms, serial_ms / parallel_ms, max_diff);
}

} // namespace

int main(int argc, char** argv) {
    std::size_t n = 1200;
    std::size_t dim = 20;
    std::size_t queries = 2000;
    int repeat = 3;
    int threads = 0;

    CLI::App app{"serial vs OpenMP kernel timings"};
    app.add_option("--n", n, "training points");
    app.add_option("--dim", dim, "ambient dimension");
    app.add_option("--queries", queries, "prediction queries");
    app.add_option("--repeat", repeat, "repetitions, best time kept");
    app.add_option("--threads", threads, "OpenMP thread cap (0 = default)");
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif
    std::printf("n=%zu dim=%zu queries=%zu repeat=%d\n\n", n, dim, queries,
                repeat);

    Rng rng = make_rng(12345);
    std::normal_distribution<double> g(0.0, 1.0);
    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
        Vec x(dim);
        for (double& v : x) v = g(rng);
        data.points.push_back(std::move(x));
        data.labels.push_back((rng() & 1u) ? 1.0 : -1.0);
    }
    std::vector<Vec> probes;
    for (std::size_t i = 0; i < queries; ++i) {
        Vec x(dim);
        for (double& v : x) v = g(rng);
        probes.push_back(std::move(x));
    }

    KernelSpec kernel;
    kernel.kind = KernelKind::Gaussian;
    kernel.bandwidth = 1.5;

    std::printf("%-14s %12s %12s %10s %12s\n", "task", "serial_ms",
                "parallel_ms", "speedup", "max_diff");

    Mat K_ser(0, 0), K_par(0, 0);
    const double gram_ser = best_ms(repeat, [&] { K_ser = serial::gram(kernel, data.points); });
    const double gram_par = best_ms(repeat, [&] { K_par = gram(kernel, data.points); });
    double gram_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram_diff = std::max(gram_diff, std::fabs(K_ser(i, j) - K_par(i, j)));
    print_row("gram", gram_ser, gram_par, gram_diff);

    const CholFactor R = factor(K_par);
    Vec loo_ser, loo_par;
    const double loo_s = best_ms(repeat, [&] { loo_ser = serial::loo_distances(R); });
    const double loo_p = best_ms(repeat, [&] { loo_par = loo_distances(R); });
    double loo_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        loo_diff = std::max(loo_diff, std::fabs(loo_ser[i] - loo_par[i]));
    print_row("loo_distances", loo_s, loo_p, loo_diff);

    const Interpolator fit = fit_batch(kernel, data);
    Vec pred_ser, pred_par;
    const double pred_s = best_ms(repeat, [&] { pred_ser = serial::predict_many(fit, probes); });
    const double pred_p = best_ms(repeat, [&] { pred_par = fit.predict_many(probes); });
    double pred_diff = 0.0;
    for (std::size_t i = 0; i < queries; ++i)
        pred_diff = std::max(pred_diff, std::fabs(pred_ser[i] - pred_par[i]));
    print_row("predict_many", pred_s, pred_p, pred_diff);

    return 0;
}
