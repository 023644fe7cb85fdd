#include "trbm/numerics.hpp"

#include <cmath>

namespace trbm {

std::uint64_t RngState::next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be >= 1");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double RngState::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1, u2;
    do {
        u1 = next_uniform();
    } while (u1 <= 0.0);
    u2 = next_uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

RngState RngState::derive(std::uint64_t salt) const {
    // Mix seed and salt through one SplitMix64 round each so children
    // with nearby salts get unrelated streams.
    RngState mixer(seed_ ^ (salt * 0xd6e8feb86659fd93ULL));
    return RngState(mixer.next_u64());
}

double sigmoid(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("sigmoid: non-finite input");
    if (x > 500.0) x = 500.0;
    if (x < -500.0) x = -500.0;
    double r;
    if (x >= 0.0) {
        r = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        r = e / (1.0 + e);
    }
    // keep strictly inside (0,1) at extreme inputs
    if (r <= 0.0) r = 1e-300;
    if (r >= 1.0) r = 1.0 - 1e-16;
    return r;
}

static void check_shapes(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": got length " + std::to_string(got) +
                             ", expected " + std::to_string(want));
    }
}

RealVector affine_forward_cols(const RealMatrix& w, const RealVector& x, const RealVector& bias) {
    check_shapes(x.size(), w.rows(), "affine_forward_cols input");
    check_shapes(bias.size(), w.cols(), "affine_forward_cols bias");
    RealVector out(bias);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < w.cols(); ++j) out[j] += w(i, j) * xi;
    }
    return out;
}

RealVector affine_forward_rows(const RealMatrix& w, const RealVector& h, const RealVector& bias) {
    check_shapes(h.size(), w.cols(), "affine_forward_rows input");
    check_shapes(bias.size(), w.rows(), "affine_forward_rows bias");
    RealVector out(bias);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) acc += w(i, j) * h[j];
        out[i] += acc;
    }
    return out;
}

BitVector sample_bernoulli(const RealVector& p, RngState& rng) {
    BitVector out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
            throw std::invalid_argument("sample_bernoulli: probability outside [0,1]");
        }
        out[i] = rng.next_uniform() < p[i] ? 1 : 0;
    }
    return out;
}

RealMatrix outer_product(const RealVector& u, const RealVector& w) {
    RealMatrix out(u.size(), w.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) out(i, j) = u[i] * w[j];
    return out;
}

RealVector to_real(const BitVector& bits) {
    RealVector out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out[i] = static_cast<double>(bits[i]);
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t count, RngState& rng) {
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    for (std::size_t i = count; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace trbm
