#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace trbm {

// Thrown when operand shapes do not conform.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when an exact-enumeration routine is asked to enumerate too
// many states.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using RealVector = std::vector<double>;
using BitVector = std::vector<std::uint8_t>;  // every element in {0,1}

// Dense row-major matrix of doubles.
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const RealMatrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Deterministic 64-bit generator (SplitMix64).  The stream depends only
// on the seed, never on the platform, so seeded runs are reproducible
// bit for bit.  Single-owner mutable: do not share one instance across
// concurrent workers; derive child seeds instead.
class RngState {
public:
    explicit RngState(std::uint64_t seed) : state_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 bits of precision.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) via rejection, bound >= 1.
    std::uint64_t next_below(std::uint64_t bound);

    // Standard normal via Box-Muller.
    double next_gaussian();

    // Child generator for an independent worker or sub-task.
    RngState derive(std::uint64_t salt) const;

private:
    std::uint64_t state_;
    std::uint64_t seed_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Logistic sigmoid, input clamped at |x| = 500 before exponentiation
// so that temperature-scaled pre-activations cannot overflow.  Result
// is strictly inside (0,1).
double sigmoid(double x);

// W^T x + bias: x indexes the rows of W (visible side), the result has
// one entry per column (hidden side).
RealVector affine_forward_cols(const RealMatrix& w, const RealVector& x, const RealVector& bias);

// W h + bias: h indexes the columns of W, the result has one entry per row.
RealVector affine_forward_rows(const RealMatrix& w, const RealVector& h, const RealVector& bias);

// Independent Bernoulli draws, p[i] must lie in [0,1].
BitVector sample_bernoulli(const RealVector& p, RngState& rng);

// result(i,j) = u[i] * w[j]
RealMatrix outer_product(const RealVector& u, const RealVector& w);

RealVector to_real(const BitVector& bits);

// Fisher-Yates shuffle of an index permutation.
std::vector<std::size_t> shuffled_indices(std::size_t count, RngState& rng);

}  // namespace trbm
