#pragma once

#include <random>
#include <vector>

#include "mnic/rng.hpp"
#include "mnic/types.hpp"

namespace testutil {

using mnic::Dataset;
using mnic::Rng;
using mnic::Vec;

inline Vec random_vec(std::size_t d, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vec v(d);
    for (double& x : v) x = g(rng);
    return v;
}

inline Dataset random_pm1_dataset(std::size_t n, std::size_t d, Rng& rng,
                                  double scale = 1.0) {
    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
        data.points.push_back(random_vec(d, rng, scale));
        data.labels.push_back((rng() & 1u) ? 1.0 : -1.0);
    }
    return data;
}

inline Dataset random_real_dataset(std::size_t n, std::size_t d, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Dataset data = random_pm1_dataset(n, d, rng);
    for (double& y : data.labels) y = g(rng);
    return data;
}

} // namespace testutil
