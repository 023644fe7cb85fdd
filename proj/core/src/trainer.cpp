#include "trbm/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace trbm {

void TrainConfig::validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("TrainConfig: eta must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("TrainConfig: alpha must lie in [0,1)");
    if (k < 1) throw std::invalid_argument("TrainConfig: k must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(temperature > 0.0)) throw std::invalid_argument("TrainConfig: temperature must be > 0");
}

GibbsResult gibbs_step(const RbmModel& model, const BitVector& v, RngState& rng) {
    GibbsResult r;
    r.h_probs = hidden_conditional(model, v);
    const BitVector h = sample_bernoulli(r.h_probs, rng);
    r.v_probs = visible_conditional(model, h);
    r.v_next = sample_bernoulli(r.v_probs, rng);
    return r;
}

namespace {

struct PhaseAccumulator {
    RealMatrix gw;
    RealVector ga;
    RealVector gb;

    PhaseAccumulator(std::size_t m, std::size_t n)
        : gw(m, n), ga(m, 0.0), gb(n, 0.0) {}

    // gw(i,j) += s * v_i * ph_j, likewise for the biases
    template <typename Vec>
    void add(const Vec& v, const RealVector& ph, double s) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double vi = static_cast<double>(v[i]);
            if (vi == 0.0) continue;
            ga[i] += s * vi;
            for (std::size_t j = 0; j < ph.size(); ++j) gw(i, j) += s * vi * ph[j];
        }
        for (std::size_t j = 0; j < ph.size(); ++j) gb[j] += s * ph[j];
    }

    ParamGradient average(std::size_t count) {
        const double inv = 1.0 / static_cast<double>(count);
        for (double& x : gw.data()) x *= inv;
        for (double& x : ga) x *= inv;
        for (double& x : gb) x *= inv;
        return {std::move(gw), std::move(ga), std::move(gb)};
    }
};

BitVector run_chain(const RbmModel& model, BitVector v, std::size_t k, RngState& rng) {
    for (std::size_t step = 0; step < k; ++step) {
        v = gibbs_step(model, v, rng).v_next;
    }
    return v;
}

// CD negative phase started from a real-valued visible state: the first
// hidden draw conditions on the real values, subsequent sweeps are binary.
BitVector run_chain_from_real(const RbmModel& model, const RealVector& v, std::size_t k,
                              RngState& rng) {
    const BitVector h = sample_bernoulli(hidden_conditional(model, v), rng);
    BitVector vb = sample_bernoulli(visible_conditional(model, h), rng);
    for (std::size_t step = 1; step < k; ++step) {
        vb = gibbs_step(model, vb, rng).v_next;
    }
    return vb;
}

template <typename Vec>
ParamGradient cd_gradient_impl(const RbmModel& model, const std::vector<Vec>& batch,
                               std::size_t k, RngState& rng) {
    if (batch.empty()) throw std::invalid_argument("cd_gradient: empty batch");
    PhaseAccumulator acc(model.visible_size(), model.hidden_size());
    for (const Vec& v : batch) {
        acc.add(v, hidden_conditional(model, v), +1.0);
        BitVector v_neg;
        if constexpr (std::is_same_v<Vec, BitVector>) {
            v_neg = run_chain(model, v, k, rng);
        } else {
            v_neg = run_chain_from_real(model, v, k, rng);
        }
        acc.add(v_neg, hidden_conditional(model, v_neg), -1.0);
    }
    return acc.average(batch.size());
}

template <typename Vec>
ParamGradient pcd_gradient_impl(const RbmModel& model, const std::vector<Vec>& batch,
                                PersistentChains& chains, std::size_t k, RngState& rng) {
    if (batch.empty()) throw std::invalid_argument("pcd_gradient: empty batch");
    if (chains.fantasy_particles.size() != batch.size()) {
        throw std::invalid_argument("pcd_gradient: chain count " +
                                    std::to_string(chains.fantasy_particles.size()) +
                                    " does not match batch size " + std::to_string(batch.size()));
    }
    PhaseAccumulator acc(model.visible_size(), model.hidden_size());
    for (std::size_t c = 0; c < batch.size(); ++c) {
        acc.add(batch[c], hidden_conditional(model, batch[c]), +1.0);
        BitVector particle = run_chain(model, chains.fantasy_particles[c], k, rng);
        acc.add(particle, hidden_conditional(model, particle), -1.0);
        chains.fantasy_particles[c] = std::move(particle);
    }
    return acc.average(batch.size());
}

}  // namespace

ParamGradient cd_gradient(const RbmModel& model, const std::vector<BitVector>& batch,
                          std::size_t k, RngState& rng) {
    return cd_gradient_impl(model, batch, k, rng);
}

ParamGradient pcd_gradient(const RbmModel& model, const std::vector<BitVector>& batch,
                           PersistentChains& chains, std::size_t k, RngState& rng) {
    return pcd_gradient_impl(model, batch, chains, k, rng);
}

void apply_update(LayerParams& params, const ParamGradient& grad, UpdateState& state,
                  const TrainConfig& cfg) {
    const std::size_t m = params.visible_size();
    const std::size_t n = params.hidden_size();
    if (grad.gw.rows() != m || grad.gw.cols() != n || grad.ga.size() != m ||
        grad.gb.size() != n || state.dw_prev.rows() != m || state.dw_prev.cols() != n) {
        throw DimensionError("apply_update: gradient/state shapes do not match parameters");
    }
    const double decay = cfg.decay_scaled_by_eta ? cfg.eta * cfg.lambda : cfg.lambda;

    // W gets the Phi term (-decay*W + momentum); biases never decay.
    for (std::size_t idx = 0; idx < m * n; ++idx) {
        const double dw = cfg.eta * grad.gw.data()[idx] - decay * params.w.data()[idx] +
                          cfg.alpha * state.dw_prev.data()[idx];
        params.w.data()[idx] += dw;
        state.dw_prev.data()[idx] = dw;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double da = cfg.eta * grad.ga[i] + cfg.alpha * state.da_prev[i];
        params.a[i] += da;
        state.da_prev[i] = da;
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double db = cfg.eta * grad.gb[j] + cfg.alpha * state.db_prev[j];
        params.b[j] += db;
        state.db_prev[j] = db;
    }
}

namespace {

template <typename Vec>
TrainResult train_impl(const std::vector<Vec>& data, std::size_t visible, std::size_t hidden,
                       const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("train_rbm: empty data");
    for (const Vec& v : data) {
        if (v.size() != visible)
            throw DimensionError("train_rbm: data vector length does not match visible size");
    }

    RngState init_rng = RngState(cfg.seed).derive(0x696e6974);  // weights
    RngState rng = RngState(cfg.seed).derive(0x67696273);       // sampling

    RbmModel model{init_layer(visible, hidden, init_rng, cfg.weight_sigma),
                   Temperature(cfg.temperature), cfg.bias_tempered};
    UpdateState state = UpdateState::zeros(visible, hidden);

    PersistentChains chains;
    if (cfg.algorithm == Algorithm::PCD) {
        RngState chain_rng = RngState(cfg.seed).derive(0x636e73);
        for (std::size_t c = 0; c < cfg.batch_size; ++c) {
            const Vec& src = data[c % data.size()];
            RealVector p(src.begin(), src.end());
            chains.fantasy_particles.push_back(sample_bernoulli(p, chain_rng));
        }
    }

    TrainResult result{std::move(model), {}};
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngState shuffle_rng(cfg.seed ^ static_cast<std::uint64_t>(epoch));
        const std::vector<std::size_t> order = shuffled_indices(data.size(), shuffle_rng);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            std::vector<Vec> batch;
            batch.reserve(end - start);
            for (std::size_t t = start; t < end; ++t) batch.push_back(data[order[t]]);

            ParamGradient grad{{}, {}, {}};
            if (cfg.algorithm == Algorithm::CD) {
                grad = cd_gradient_impl(result.model, batch, cfg.k, rng);
            } else if (batch.size() == chains.fantasy_particles.size()) {
                grad = pcd_gradient_impl(result.model, batch, chains, cfg.k, rng);
            } else {
                // last incomplete batch drives only the leading chains
                PersistentChains sub;
                sub.fantasy_particles.assign(chains.fantasy_particles.begin(),
                                             chains.fantasy_particles.begin() + batch.size());
                grad = pcd_gradient_impl(result.model, batch, sub, cfg.k, rng);
                std::copy(sub.fantasy_particles.begin(), sub.fantasy_particles.end(),
                          chains.fantasy_particles.begin());
            }
            apply_update(result.model.params, grad, state, cfg);
        }

        EpochMetrics em;
        em.epoch = epoch + 1;
        double mse_sum = 0.0, act_sum = 0.0;
        for (const Vec& v : data) {
            const RealVector ph = hidden_conditional(result.model, v);
            const RealVector vr = visible_conditional(result.model, ph);
            double item = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double d = static_cast<double>(v[i]) - vr[i];
                item += d * d;
            }
            mse_sum += item / static_cast<double>(v.size());
            double act = 0.0;
            for (double p : ph) act += p;
            act_sum += act / static_cast<double>(ph.size());
        }
        em.train_mse = mse_sum / static_cast<double>(data.size());
        em.mean_hidden_activation = act_sum / static_cast<double>(data.size());
        double wsum = 0.0;
        for (double w : result.model.params.w.data()) wsum += w;
        em.mean_weight = wsum / static_cast<double>(visible * hidden);
        result.metrics.push_back(em);
        if (on_epoch) on_epoch(em);
    }

    result.model.params.validate();
    return result;
}

}  // namespace

TrainResult train_rbm(const std::vector<BitVector>& data, std::size_t visible,
                      std::size_t hidden, const TrainConfig& cfg,
                      const EpochCallback& on_epoch) {
    return train_impl(data, visible, hidden, cfg, on_epoch);
}

TrainResult train_rbm_real(const std::vector<RealVector>& data, std::size_t visible,
                           std::size_t hidden, const TrainConfig& cfg,
                           const EpochCallback& on_epoch) {
    for (const RealVector& v : data) {
        for (double x : v) {
            if (!(x >= 0.0 && x <= 1.0))
                throw std::invalid_argument("train_rbm_real: visible value outside [0,1]");
        }
    }
    return train_impl(data, visible, hidden, cfg, on_epoch);
}

}  // namespace trbm
