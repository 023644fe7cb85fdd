#pragma once

#include <functional>
#include <optional>

#include "trbm/rbm.hpp"

namespace trbm {

enum class Algorithm { CD, PCD };

struct TrainConfig {
    double eta = 0.1;        // learning rate
    double lambda = 0.1;     // weight decay
    double alpha = 0.00001;  // momentum
    std::size_t k = 1;       // Gibbs steps per gradient estimate
    Algorithm algorithm = Algorithm::CD;
    std::size_t epochs = 30;
    std::size_t batch_size = 20;
    double temperature = 1.0;
    bool bias_tempered = true;
    // Literal update applies -lambda*W per step; when set, decay is
    // scaled by eta instead.
    bool decay_scaled_by_eta = false;
    std::uint64_t seed = 0;
    double weight_sigma = 0.01;

    void validate() const;
};

// Previous-step deltas for the momentum terms.
struct UpdateState {
    RealMatrix dw_prev;
    RealVector da_prev;
    RealVector db_prev;

    static UpdateState zeros(std::size_t m, std::size_t n) {
        return {RealMatrix(m, n), RealVector(m, 0.0), RealVector(n, 0.0)};
    }
};

// Fantasy particles for PCD, one persistent Gibbs chain per batch slot.
struct PersistentChains {
    std::vector<BitVector> fantasy_particles;
};

struct GibbsResult {
    BitVector v_next;
    RealVector h_probs;   // P(h|v) at the starting state
    RealVector v_probs;   // P(v|h) the new state was drawn from
};

// One alternating Gibbs sweep: h ~ P(h|v), then v' ~ P(v|h).
GibbsResult gibbs_step(const RbmModel& model, const BitVector& v, RngState& rng);

// Batch-averaged CD-k gradient estimate (unregularized).  The negative
// phase uses hidden probabilities and sampled visible bits after k
// Gibbs sweeps started from the data.
ParamGradient cd_gradient(const RbmModel& model, const std::vector<BitVector>& batch,
                          std::size_t k, RngState& rng);

// Same estimate with the negative chains resuming from the stored
// fantasy particles, which are replaced in place.
ParamGradient pcd_gradient(const RbmModel& model, const std::vector<BitVector>& batch,
                           PersistentChains& chains, std::size_t k, RngState& rng);

// Gradient ascent step with momentum; weight decay applies to W only,
// never to the biases.
void apply_update(LayerParams& params, const ParamGradient& grad, UpdateState& state,
                  const TrainConfig& cfg);

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_mse = 0.0;
    double mean_weight = 0.0;
    double mean_hidden_activation = 0.0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

struct TrainResult {
    RbmModel model;
    std::vector<EpochMetrics> metrics;
};

TrainResult train_rbm(const std::vector<BitVector>& data, std::size_t visible,
                      std::size_t hidden, const TrainConfig& cfg,
                      const EpochCallback& on_epoch = nullptr);

// Same loop with real-valued visible data in [0,1]; used when stacked
// training propagates hidden probabilities instead of samples.
TrainResult train_rbm_real(const std::vector<RealVector>& data, std::size_t visible,
                           std::size_t hidden, const TrainConfig& cfg,
                           const EpochCallback& on_epoch = nullptr);

}  // namespace trbm
