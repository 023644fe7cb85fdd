#pragma once

#include <iosfwd>
#include <string>

#include "trbm/numerics.hpp"

namespace trbm {

// Positive temperature scaling the energy in the Boltzmann
// distribution.  Low values sharpen hidden activation probabilities,
// high values flatten them toward 0.5.
class Temperature {
public:
    explicit Temperature(double value) : value_(value) {
        if (!(value > 0.0)) throw std::invalid_argument("Temperature must be > 0");
    }
    double value() const { return value_; }

private:
    double value_;
};

// Parameters of one binary-binary RBM layer: weights W (visible x
// hidden), visible bias a, hidden bias b.
struct LayerParams {
    RealMatrix w;   // m x n
    RealVector a;   // length m
    RealVector b;   // length n

    std::size_t visible_size() const { return w.rows(); }
    std::size_t hidden_size() const { return w.cols(); }

    void validate() const;
};

struct RbmModel {
    LayerParams params;
    Temperature temperature{1.0};
    // When true (default) the hidden bias is divided by T along with
    // the weight term; when false only the weight term is tempered.
    bool bias_tempered = true;

    std::size_t visible_size() const { return params.visible_size(); }
    std::size_t hidden_size() const { return params.hidden_size(); }
};

// Gaussian(0, 0.01) weights, zero biases.
LayerParams init_layer(std::size_t visible, std::size_t hidden, RngState& rng,
                       double weight_sigma = 0.01);

// E(v,h) = -sum a_i v_i - sum b_j h_j - sum_ij v_i h_j w_ij.
// Temperature enters the distribution, not the energy.
double energy(const RbmModel& model, const BitVector& v, const BitVector& h);

// P(h_j = 1 | v) with the pre-activation divided by T.
RealVector hidden_conditional(const RbmModel& model, const BitVector& v);
RealVector hidden_conditional(const RbmModel& model, const RealVector& v);

// P(v_i = 1 | h); the temperature never applies to the visible units.
RealVector visible_conditional(const RbmModel& model, const BitVector& h);
RealVector visible_conditional(const RbmModel& model, const RealVector& h);

// Largest m+n the exact_* enumeration routines accept.
inline constexpr std::size_t kMaxEnumerationBits = 24;

// Z = sum over all 2^(m+n) states of exp(-E/T).
double exact_partition(const RbmModel& model);

// P(v) = (1/Z) sum_h exp(-E(v,h)/T).
double exact_marginal(const RbmModel& model, const BitVector& v);

struct ParamGradient {
    RealMatrix gw;
    RealVector ga;
    RealVector gb;
};

// Exact d(mean log P(v))/d(theta) by full enumeration; the oracle the
// CD/PCD estimates are validated against.
ParamGradient free_energy_gradient_exact(const RbmModel& model,
                                         const std::vector<BitVector>& data);

// Flat binary container "TRBM1": m, n as 64-bit LE counts, then W
// row-major, a, b, T as 64-bit LE doubles.  Round-trip is bit exact.
void save_rbm(const RbmModel& model, std::ostream& out);
RbmModel load_rbm(std::istream& in);
void save_rbm_file(const RbmModel& model, const std::string& path);
RbmModel load_rbm_file(const std::string& path);

}  // namespace trbm
