#pragma once

#include <iosfwd>

#include "trbm/trainer.hpp"

namespace trbm {

enum class StackKind { DBN, DBM };

// Which terms of the layered hidden conditionals divide by T.  Literal
// tempers only the bottom-up term; Uniform tempers the top-down term as
// well, as dividing the whole energy by T would.
enum class TemperingMode { Literal, Uniform };

// Ordered stack of RBM layers sharing one temperature.  The kind tag
// selects which conditionals reconstruction uses: DBM drops biases and
// uses the layered energy's conditionals, DBN uses each layer's own RBM
// conditionals.
struct StackedModel {
    std::vector<LayerParams> layers;
    StackKind kind = StackKind::DBN;
    Temperature temperature{1.0};
    bool bias_tempered = true;
    TemperingMode tempering = TemperingMode::Literal;

    std::size_t input_size() const { return layers.front().visible_size(); }
    std::size_t layer_count() const { return layers.size(); }
    void validate() const;

    // View of one layer as a standalone tempered RBM.
    RbmModel layer_rbm(std::size_t index) const;
};

// Layered energy: -sum_l x_l^T W_l x_{l+1} over consecutive layer
// states, biases excluded.  states[0] is the visible vector.
double dbm_energy(const StackedModel& model, const std::vector<BitVector>& states);
double dbm_energy(const StackedModel& model, const BitVector& v, const BitVector& h1,
                  const BitVector& h2);

// P(h1_j = 1 | v, h2): bottom-up term divided by T, top-down term per
// the tempering mode.
RealVector dbm_hidden1_conditional(const StackedModel& model, const BitVector& v,
                                   const BitVector& h2);

// P(h2_z = 1 | h1) = sigmoid((W2^T h1) / T).
RealVector dbm_hidden2_conditional(const StackedModel& model, const BitVector& h1);

// P(v_i = 1 | h1) = sigmoid(W1 h1), never tempered.
RealVector dbm_visible_conditional(const StackedModel& model, const BitVector& h1);

struct StackConfig {
    TrainConfig train;
    // Propagate hidden samples instead of probabilities when forming
    // the next layer's training set.
    bool propagate_samples = false;
    TemperingMode tempering = TemperingMode::Literal;
    // Fixed-point sweeps of the layered conditionals after the up pass
    // (0 = pure feed-forward reconstruction).
    std::size_t mean_field_iterations = 0;
};

// Greedy layer-wise training: each layer is learned as a tempered RBM
// on the (propagated) output of the layer below.
StackedModel train_stack(const std::vector<BitVector>& data, const std::vector<std::size_t>& sizes,
                         const StackConfig& cfg, StackKind kind,
                         const std::function<void(std::size_t, const EpochMetrics&)>& on_epoch = nullptr);

// Deterministic mean-field pass: probabilities bottom-up through every
// hidden layer, then top-down to the visible layer.  Returns per-pixel
// reconstruction probabilities.
RealVector reconstruct(const StackedModel& model, const BitVector& v,
                       std::size_t mean_field_iterations = 0);

// Container "TDBM1": kind tag, layer count, then each layer in the
// TRBM1 layout.
void save_stack(const StackedModel& model, std::ostream& out);
StackedModel load_stack(std::istream& in);
void save_stack_file(const StackedModel& model, const std::string& path);
StackedModel load_stack_file(const std::string& path);

}  // namespace trbm
