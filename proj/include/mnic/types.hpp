#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mnic {

using Vec = std::vector<double>;

// Dense row-major matrix. Everything in this library is double precision;
// sizes stay at desk scale (n up to a few thousand) so no blocking is done.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Mat&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

// y += c * x
inline void axpy(double c, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Thrown when a point to be added is (numerically) inside the span of the
// points already held, so the projection residual has no usable magnitude.
// Carries the offending Schur complement so callers can report or log it.
class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(double schur_sq, const std::string& what)
        : std::runtime_error(what), schur_sq_(schur_sq) {}

    double schur_sq() const { return schur_sq_; }

private:
    double schur_sq_;
};

// Labeled points, one row per sample. Labels are free reals for fitting;
// classification-style accounting expects them in {-1,+1}.
struct Dataset {
    std::vector<Vec> points;
    Vec labels;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

    bool labels_are_pm1() const {
        for (double y : labels)
            if (y != 1.0 && y != -1.0) return false;
        return true;
    }
};

} // namespace mnic
