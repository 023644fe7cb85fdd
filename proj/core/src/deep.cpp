#include "trbm/deep.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "binary_io.hpp"

namespace trbm {

void StackedModel::validate() const {
    if (layers.empty()) throw std::invalid_argument("StackedModel: no layers");
    for (const LayerParams& p : layers) p.validate();
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        if (layers[l].hidden_size() != layers[l + 1].visible_size()) {
            throw DimensionError("StackedModel: layer " + std::to_string(l) +
                                 " hidden size does not match layer " + std::to_string(l + 1) +
                                 " visible size");
        }
    }
}

RbmModel StackedModel::layer_rbm(std::size_t index) const {
    if (index >= layers.size()) throw std::out_of_range("StackedModel: layer index");
    return RbmModel{layers[index], temperature, bias_tempered};
}

static void require_dbm(const StackedModel& model, std::size_t min_layers) {
    if (model.kind != StackKind::DBM) {
        throw std::invalid_argument("operation requires a DBM-kind stack");
    }
    if (model.layers.size() < min_layers) {
        throw std::invalid_argument("operation requires at least " + std::to_string(min_layers) +
                                    " layers");
    }
}

static void check_len(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": got length " + std::to_string(got) +
                             ", expected " + std::to_string(want));
    }
}

double dbm_energy(const StackedModel& model, const std::vector<BitVector>& states) {
    require_dbm(model, 2);
    if (states.size() != model.layers.size() + 1) {
        throw DimensionError("dbm_energy: expected one state per layer plus the visible vector");
    }
    double e = 0.0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const RealMatrix& w = model.layers[l].w;
        const BitVector& lo = states[l];
        const BitVector& hi = states[l + 1];
        check_len(lo.size(), w.rows(), "dbm_energy lower state");
        check_len(hi.size(), w.cols(), "dbm_energy upper state");
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (!lo[i]) continue;
            for (std::size_t j = 0; j < hi.size(); ++j)
                if (hi[j]) e -= w(i, j);
        }
    }
    return e;
}

double dbm_energy(const StackedModel& model, const BitVector& v, const BitVector& h1,
                  const BitVector& h2) {
    return dbm_energy(model, std::vector<BitVector>{v, h1, h2});
}

RealVector dbm_hidden1_conditional(const StackedModel& model, const BitVector& v,
                                   const BitVector& h2) {
    require_dbm(model, 2);
    const RealMatrix& w1 = model.layers[0].w;
    const RealMatrix& w2 = model.layers[1].w;
    check_len(v.size(), w1.rows(), "dbm_hidden1_conditional visible");
    check_len(h2.size(), w2.cols(), "dbm_hidden1_conditional h2");
    const double t = model.temperature.value();
    RealVector out(w1.cols());
    for (std::size_t j = 0; j < out.size(); ++j) {
        double up = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i]) up += w1(i, j);
        double down = 0.0;
        for (std::size_t z = 0; z < h2.size(); ++z)
            if (h2[z]) down += w2(j, z);
        if (model.tempering == TemperingMode::Uniform) down /= t;
        out[j] = sigmoid(up / t + down);
    }
    return out;
}

RealVector dbm_hidden2_conditional(const StackedModel& model, const BitVector& h1) {
    require_dbm(model, 2);
    const RealMatrix& w2 = model.layers[1].w;
    check_len(h1.size(), w2.rows(), "dbm_hidden2_conditional h1");
    const double t = model.temperature.value();
    RealVector out(w2.cols());
    for (std::size_t z = 0; z < out.size(); ++z) {
        double pre = 0.0;
        for (std::size_t i = 0; i < h1.size(); ++i)
            if (h1[i]) pre += w2(i, z);
        out[z] = sigmoid(pre / t);
    }
    return out;
}

RealVector dbm_visible_conditional(const StackedModel& model, const BitVector& h1) {
    require_dbm(model, 2);
    const RealMatrix& w1 = model.layers[0].w;
    check_len(h1.size(), w1.cols(), "dbm_visible_conditional h1");
    RealVector out(w1.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double pre = 0.0;
        for (std::size_t j = 0; j < h1.size(); ++j)
            if (h1[j]) pre += w1(i, j);
        out[i] = sigmoid(pre);
    }
    return out;
}

namespace {

// Bottom-up step through layer l: DBN uses the layer's RBM hidden
// conditional (biases included), DBM drops the biases.
RealVector up_step(const StackedModel& model, std::size_t l, const RealVector& x) {
    const RealMatrix& w = model.layers[l].w;
    check_len(x.size(), w.rows(), "up_step input");
    const double t = model.temperature.value();
    RealVector out(w.cols(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += w(i, j) * x[i];
    }
    for (std::size_t j = 0; j < out.size(); ++j) {
        double arg;
        if (model.kind == StackKind::DBM) {
            arg = out[j] / t;
        } else {
            const double b = model.layers[l].b[j];
            arg = model.bias_tempered ? (out[j] + b) / t : out[j] / t + b;
        }
        out[j] = sigmoid(arg);
    }
    return out;
}

// Top-down step through layer l, never tempered.
RealVector down_step(const StackedModel& model, std::size_t l, const RealVector& y) {
    const RealMatrix& w = model.layers[l].w;
    check_len(y.size(), w.cols(), "down_step input");
    RealVector out(w.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double pre = model.kind == StackKind::DBM ? 0.0 : model.layers[l].a[i];
        for (std::size_t j = 0; j < y.size(); ++j) pre += w(i, j) * y[j];
        out[i] = sigmoid(pre);
    }
    return out;
}

// Pre-activation W_l^T x without nonlinearity (for mean-field sweeps).
RealVector up_pre(const RealMatrix& w, const RealVector& x) {
    RealVector out(w.cols(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += w(i, j) * x[i];
    }
    return out;
}

RealVector down_pre(const RealMatrix& w, const RealVector& y) {
    RealVector out(w.rows(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double pre = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) pre += w(i, j) * y[j];
        out[i] = pre;
    }
    return out;
}

}  // namespace

RealVector reconstruct(const StackedModel& model, const BitVector& v,
                       std::size_t mean_field_iterations) {
    check_len(v.size(), model.input_size(), "reconstruct input");
    const std::size_t depth = model.layers.size();
    std::vector<RealVector> hidden(depth);

    RealVector x = to_real(v);
    for (std::size_t l = 0; l < depth; ++l) {
        hidden[l] = up_step(model, l, l == 0 ? x : hidden[l - 1]);
    }

    // Optional fixed-point sweeps: middle layers combine the tempered
    // bottom-up term with the (mode-dependent) top-down term.
    const double t = model.temperature.value();
    for (std::size_t it = 0; it < mean_field_iterations; ++it) {
        for (std::size_t l = 0; l < depth; ++l) {
            const RealVector& below = l == 0 ? x : hidden[l - 1];
            RealVector up = up_pre(model.layers[l].w, below);
            for (std::size_t j = 0; j < up.size(); ++j) {
                double arg = up[j];
                if (model.kind == StackKind::DBN) {
                    const double b = model.layers[l].b[j];
                    arg = model.bias_tempered ? (arg + b) : arg + b * t;
                }
                arg /= t;
                if (l + 1 < depth) {
                    double down = down_pre(model.layers[l + 1].w, hidden[l + 1])[j];
                    if (model.tempering == TemperingMode::Uniform) down /= t;
                    arg += down;
                }
                up[j] = sigmoid(arg);
            }
            hidden[l] = std::move(up);
        }
    }

    RealVector y = hidden[depth - 1];
    for (std::size_t l = depth; l-- > 0;) {
        y = down_step(model, l, y);
    }
    return y;
}

StackedModel train_stack(const std::vector<BitVector>& data, const std::vector<std::size_t>& sizes,
                         const StackConfig& cfg, StackKind kind,
                         const std::function<void(std::size_t, const EpochMetrics&)>& on_epoch) {
    if (sizes.size() < 2) throw std::invalid_argument("train_stack: need input plus >= 1 hidden layer");
    if (data.empty()) throw std::invalid_argument("train_stack: empty data");
    for (const BitVector& v : data) {
        if (v.size() != sizes[0])
            throw DimensionError("train_stack: data vector length does not match sizes[0]");
    }

    StackedModel stack;
    stack.kind = kind;
    stack.temperature = Temperature(cfg.train.temperature);
    stack.bias_tempered = cfg.train.bias_tempered;
    stack.tempering = cfg.tempering;

    std::vector<RealVector> current;
    current.reserve(data.size());
    for (const BitVector& v : data) current.push_back(to_real(v));

    RngState prop_rng = RngState(cfg.train.seed).derive(0x70726f70);

    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        TrainConfig layer_cfg = cfg.train;
        // layer 0 uses the config seed directly so a one-layer stack
        // reproduces train_rbm exactly
        if (l > 0) layer_cfg.seed = RngState(cfg.train.seed).derive(0x6c617972 + l).seed();

        auto cb = on_epoch
                      ? EpochCallback([&, l](const EpochMetrics& em) { on_epoch(l, em); })
                      : EpochCallback();
        TrainResult r = train_rbm_real(current, sizes[l], sizes[l + 1], layer_cfg, cb);
        stack.layers.push_back(r.model.params);

        if (l + 2 < sizes.size()) {
            std::vector<RealVector> next;
            next.reserve(current.size());
            for (const RealVector& v : current) {
                RealVector ph = hidden_conditional(r.model, v);
                if (cfg.propagate_samples) {
                    ph = to_real(sample_bernoulli(ph, prop_rng));
                }
                next.push_back(std::move(ph));
            }
            current = std::move(next);
        }
    }

    stack.validate();
    return stack;
}

void save_stack(const StackedModel& model, std::ostream& out) {
    out.write("TDBM1", 5);
    out.put(model.kind == StackKind::DBM ? 1 : 0);
    io::write_u64(out, model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        save_rbm(RbmModel{model.layers[l], model.temperature, model.bias_tempered}, out);
    }
    if (!out) throw std::runtime_error("failed writing stack container");
}

StackedModel load_stack(std::istream& in) {
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "TDBM1", 5) != 0) {
        throw std::runtime_error("not a TDBM1 container");
    }
    const int kind_tag = in.get();
    if (kind_tag != 0 && kind_tag != 1) throw std::runtime_error("TDBM1: bad kind tag");
    const std::uint64_t count = io::read_u64(in);
    if (count == 0 || count > 64) throw std::runtime_error("TDBM1: implausible layer count");

    StackedModel stack;
    stack.kind = kind_tag == 1 ? StackKind::DBM : StackKind::DBN;
    for (std::uint64_t l = 0; l < count; ++l) {
        RbmModel layer = load_rbm(in);
        if (l == 0) stack.temperature = layer.temperature;
        stack.layers.push_back(std::move(layer.params));
    }
    stack.validate();
    return stack;
}

void save_stack_file(const StackedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    save_stack(model, out);
}

StackedModel load_stack_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return load_stack(in);
}

}  // namespace trbm
