#include "mnic/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mnic {

void KernelSpec::validate() const {
    switch (kind) {
    case KernelKind::Gaussian:
        if (!(bandwidth > 0.0))
            throw std::invalid_argument("kernel: bandwidth must be positive");
        break;
    case KernelKind::Polynomial:
        if (degree < 1)
            throw std::invalid_argument("kernel: degree must be >= 1");
        if (!(offset >= 0.0))
            throw std::invalid_argument("kernel: offset must be >= 0");
        break;
    case KernelKind::ExplicitFeatures:
        if (feature_map != "identity" && feature_map != "affine")
            throw std::invalid_argument("kernel: unknown feature map '" + feature_map + "'");
        break;
    case KernelKind::Linear:
        break;
    }
}

Vec apply_feature_map(const std::string& id, std::span<const double> x) {
    if (id == "identity") return Vec(x.begin(), x.end());
    if (id == "affine") {
        Vec phi(x.begin(), x.end());
        phi.push_back(1.0);
        return phi;
    }
    throw std::invalid_argument("kernel: unknown feature map '" + id + "'");
}

static void check_dims(const KernelSpec& spec, std::size_t dx, std::size_t dz) {
    if (dx != dz)
        throw std::invalid_argument("kernel: mismatched input dimensions");
    if (spec.input_dim != 0 && dx != spec.input_dim)
        throw std::invalid_argument("kernel: input dimension does not match spec");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z) {
    check_dims(spec, x.size(), z.size());
    switch (spec.kind) {
    case KernelKind::Linear:
        return dot(x, z);
    case KernelKind::Gaussian:
        // exp(0) = 1 exactly when x == z: sq_dist sums exact zeros.
        return std::exp(-sq_dist(x, z) / (2.0 * spec.bandwidth * spec.bandwidth));
    case KernelKind::Polynomial: {
        const double base = dot(x, z) + spec.offset;
        double p = 1.0;
        for (int i = 0; i < spec.degree; ++i) p *= base;
        return p;
    }
    case KernelKind::ExplicitFeatures: {
        const Vec px = apply_feature_map(spec.feature_map, x);
        const Vec pz = apply_feature_map(spec.feature_map, z);
        return dot(px, pz);
    }
    }
    throw std::logic_error("kernel: unreachable kind");
}

namespace serial {
Mat gram(const KernelSpec& spec, const std::vector<Vec>& points) {
    const std::size_t n = points.size();
    Mat K(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = kernel_eval(spec, points[i], points[j]);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}
} // namespace serial

Mat gram(const KernelSpec& spec, const std::vector<Vec>& points) {
    const std::size_t n = points.size();
    Mat K(n, n);
    // Each (i, j) entry depends only on rows i and j, so row blocks can be
    // filled in any order without synchronization.
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (std::size_t j = 0; j <= ui; ++j) {
            const double v = kernel_eval(spec, points[ui], points[j]);
            K(ui, j) = v;
            K(j, ui) = v;
        }
    }
    return K;
}

Vec cross_gram(const KernelSpec& spec, const std::vector<Vec>& points,
               std::span<const double> z) {
    Vec k(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        k[i] = kernel_eval(spec, points[i], z);
    return k;
}

} // namespace mnic
