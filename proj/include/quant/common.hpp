#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace quant {

/// Raised for malformed or inconsistent user configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid data or infeasible inputs (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. Small and unclever on purpose; the
/// systems solved here are at most a few thousand rows by a handful of columns.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// y = A x
std::vector<double> mat_vec(const Matrix& a, std::span<const double> x);
// y = A^T x
std::vector<double> mat_tvec(const Matrix& a, std::span<const double> x);
// A^T A
Matrix gram(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double l1_distance(std::span<const double> a, std::span<const double> b);
double l1_norm(std::span<const double> a);
double sum(std::span<const double> a);

/// Deterministic 64-bit generator (SplitMix64). Used everywhere instead of
/// <random> engines so that sampled index sets are stable across platforms
/// and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

    /// Uniform in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n);

    /// Uniform in [0, 1).
    double next_double();

    /// Standard normal via Box-Muller.
    double next_normal();

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

/// Stable combination of a base seed with a stream index.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

/// In-place partial Fisher-Yates: after the call the first `count` elements
/// are a uniform sample without replacement.
void partial_shuffle(std::vector<std::size_t>& items, std::size_t count, Rng& rng);

} // namespace quant
