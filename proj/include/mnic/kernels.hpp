#pragma once

#include <span>
#include <string>

#include "mnic/types.hpp"

namespace mnic {

enum class KernelKind { Linear, Gaussian, Polynomial, ExplicitFeatures };

// Positive (semi)definite kernel description. input_dim = 0 means "accept
// whatever dimension the data has"; a positive value is enforced on every
// evaluation. Parameters not used by a kind are ignored by it.
struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    std::size_t input_dim = 0;
    double bandwidth = 1.0;   // Gaussian
    int degree = 2;           // Polynomial, >= 1
    double offset = 1.0;      // Polynomial, >= 0
    std::string feature_map = "identity";  // ExplicitFeatures

    void validate() const;
};

// Feature map registry for the ExplicitFeatures kind. "identity" maps x to
// itself; "affine" appends a constant 1 coordinate.
Vec apply_feature_map(const std::string& id, std::span<const double> x);

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z);

// Gram matrix K[i][j] = k(x_i, x_j). The default entry point parallelizes
// row assembly with OpenMP; serial::gram is the plain-loop reference kept
// for testing and benchmarking. Both produce identical bits: every entry is
// an independent function of its two rows.
Mat gram(const KernelSpec& spec, const std::vector<Vec>& points);

// k(x_i, z) for each stored point x_i. Empty input gives an empty vector.
Vec cross_gram(const KernelSpec& spec, const std::vector<Vec>& points,
               std::span<const double> z);

namespace serial {
Mat gram(const KernelSpec& spec, const std::vector<Vec>& points);
}

} // namespace mnic
