#include "trbm/rbm.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "binary_io.hpp"
#include <istream>
#include <ostream>

namespace trbm {

void LayerParams::validate() const {
    if (a.size() != w.rows() || b.size() != w.cols()) {
        throw DimensionError("LayerParams: bias lengths do not match weight shape");
    }
    for (double x : w.data())
        if (!std::isfinite(x)) throw std::invalid_argument("LayerParams: non-finite weight");
    for (double x : a)
        if (!std::isfinite(x)) throw std::invalid_argument("LayerParams: non-finite visible bias");
    for (double x : b)
        if (!std::isfinite(x)) throw std::invalid_argument("LayerParams: non-finite hidden bias");
}

LayerParams init_layer(std::size_t visible, std::size_t hidden, RngState& rng,
                       double weight_sigma) {
    LayerParams p;
    p.w = RealMatrix(visible, hidden);
    for (double& x : p.w.data()) x = weight_sigma * rng.next_gaussian();
    p.a.assign(visible, 0.0);
    p.b.assign(hidden, 0.0);
    return p;
}

static void check_visible(const RbmModel& model, std::size_t len) {
    if (len != model.visible_size()) {
        throw DimensionError("visible vector length " + std::to_string(len) +
                             " does not match model m=" + std::to_string(model.visible_size()));
    }
}

static void check_hidden(const RbmModel& model, std::size_t len) {
    if (len != model.hidden_size()) {
        throw DimensionError("hidden vector length " + std::to_string(len) +
                             " does not match model n=" + std::to_string(model.hidden_size()));
    }
}

double energy(const RbmModel& model, const BitVector& v, const BitVector& h) {
    check_visible(model, v.size());
    check_hidden(model, h.size());
    const LayerParams& p = model.params;
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i]) e -= p.a[i];
    for (std::size_t j = 0; j < h.size(); ++j)
        if (h[j]) e -= p.b[j];
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i]) continue;
        for (std::size_t j = 0; j < h.size(); ++j)
            if (h[j]) e -= p.w(i, j);
    }
    return e;
}

template <typename Vec>
static RealVector hidden_conditional_impl(const RbmModel& model, const Vec& v) {
    check_visible(model, v.size());
    const double t = model.temperature.value();
    RealVector pre(model.hidden_size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double vi = static_cast<double>(v[i]);
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < pre.size(); ++j) pre[j] += model.params.w(i, j) * vi;
    }
    for (std::size_t j = 0; j < pre.size(); ++j) {
        const double b = model.params.b[j];
        const double arg = model.bias_tempered ? (pre[j] + b) / t : pre[j] / t + b;
        pre[j] = sigmoid(arg);
    }
    return pre;
}

RealVector hidden_conditional(const RbmModel& model, const BitVector& v) {
    return hidden_conditional_impl(model, v);
}
RealVector hidden_conditional(const RbmModel& model, const RealVector& v) {
    return hidden_conditional_impl(model, v);
}

template <typename Vec>
static RealVector visible_conditional_impl(const RbmModel& model, const Vec& h) {
    check_hidden(model, h.size());
    RealVector out(model.visible_size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = model.params.a[i];
        for (std::size_t j = 0; j < h.size(); ++j)
            acc += model.params.w(i, j) * static_cast<double>(h[j]);
        out[i] = sigmoid(acc);
    }
    return out;
}

RealVector visible_conditional(const RbmModel& model, const BitVector& h) {
    return visible_conditional_impl(model, h);
}
RealVector visible_conditional(const RbmModel& model, const RealVector& h) {
    return visible_conditional_impl(model, h);
}

static void check_enumerable(const RbmModel& model) {
    if (model.visible_size() + model.hidden_size() > kMaxEnumerationBits) {
        throw CapacityError("model too large for exact enumeration: m+n = " +
                            std::to_string(model.visible_size() + model.hidden_size()) +
                            " > " + std::to_string(kMaxEnumerationBits));
    }
}

static BitVector bits_of(std::uint64_t code, std::size_t len) {
    BitVector out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = (code >> i) & 1u;
    return out;
}

double exact_partition(const RbmModel& model) {
    check_enumerable(model);
    const std::size_t m = model.visible_size();
    const std::size_t n = model.hidden_size();
    const double t = model.temperature.value();
    double z = 0.0;
    for (std::uint64_t vc = 0; vc < (1ULL << m); ++vc) {
        const BitVector v = bits_of(vc, m);
        for (std::uint64_t hc = 0; hc < (1ULL << n); ++hc) {
            z += std::exp(-energy(model, v, bits_of(hc, n)) / t);
        }
    }
    return z;
}

double exact_marginal(const RbmModel& model, const BitVector& v) {
    check_enumerable(model);
    check_visible(model, v.size());
    const std::size_t n = model.hidden_size();
    const double t = model.temperature.value();
    double num = 0.0;
    for (std::uint64_t hc = 0; hc < (1ULL << n); ++hc) {
        num += std::exp(-energy(model, v, bits_of(hc, n)) / t);
    }
    return num / exact_partition(model);
}

ParamGradient free_energy_gradient_exact(const RbmModel& model,
                                         const std::vector<BitVector>& data) {
    check_enumerable(model);
    if (data.empty()) throw std::invalid_argument("free_energy_gradient_exact: empty data");
    const std::size_t m = model.visible_size();
    const std::size_t n = model.hidden_size();
    const double t = model.temperature.value();

    ParamGradient g{RealMatrix(m, n), RealVector(m, 0.0), RealVector(n, 0.0)};

    // positive phase: E_{h|v} over each data point, by enumeration of h
    for (const BitVector& v : data) {
        check_visible(model, v.size());
        double norm = 0.0;
        RealVector eh(n, 0.0);
        for (std::uint64_t hc = 0; hc < (1ULL << n); ++hc) {
            const BitVector h = bits_of(hc, n);
            const double w = std::exp(-energy(model, v, h) / t);
            norm += w;
            for (std::size_t j = 0; j < n; ++j)
                if (h[j]) eh[j] += w;
        }
        for (std::size_t j = 0; j < n; ++j) eh[j] /= norm;
        for (std::size_t i = 0; i < m; ++i) {
            g.ga[i] += static_cast<double>(v[i]);
            if (!v[i]) continue;
            for (std::size_t j = 0; j < n; ++j) g.gw(i, j) += eh[j];
        }
        for (std::size_t j = 0; j < n; ++j) g.gb[j] += eh[j];
    }
    const double inv_count = 1.0 / static_cast<double>(data.size());
    for (double& x : g.gw.data()) x *= inv_count;
    for (double& x : g.ga) x *= inv_count;
    for (double& x : g.gb) x *= inv_count;

    // negative phase: full model expectation
    double z = 0.0;
    RealMatrix evh(m, n);
    RealVector ev(m, 0.0), eh(n, 0.0);
    for (std::uint64_t vc = 0; vc < (1ULL << m); ++vc) {
        const BitVector v = bits_of(vc, m);
        for (std::uint64_t hc = 0; hc < (1ULL << n); ++hc) {
            const BitVector h = bits_of(hc, n);
            const double w = std::exp(-energy(model, v, h) / t);
            z += w;
            for (std::size_t i = 0; i < m; ++i) {
                if (!v[i]) continue;
                ev[i] += w;
                for (std::size_t j = 0; j < n; ++j)
                    if (h[j]) evh(i, j) += w;
            }
            for (std::size_t j = 0; j < n; ++j)
                if (h[j]) eh[j] += w;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        g.ga[i] = (g.ga[i] - ev[i] / z) / t;
        for (std::size_t j = 0; j < n; ++j) g.gw(i, j) = (g.gw(i, j) - evh(i, j) / z) / t;
    }
    for (std::size_t j = 0; j < n; ++j) g.gb[j] = (g.gb[j] - eh[j] / z) / t;
    return g;
}

void save_rbm(const RbmModel& model, std::ostream& out) {
    out.write("TRBM1", 5);
    io::write_u64(out, model.visible_size());
    io::write_u64(out, model.hidden_size());
    for (double x : model.params.w.data()) io::write_f64(out, x);
    for (double x : model.params.a) io::write_f64(out, x);
    for (double x : model.params.b) io::write_f64(out, x);
    io::write_f64(out, model.temperature.value());
    if (!out) throw std::runtime_error("failed writing RBM container");
}

RbmModel load_rbm(std::istream& in) {
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "TRBM1", 5) != 0) {
        throw std::runtime_error("not a TRBM1 container");
    }
    const std::uint64_t m = io::read_u64(in);
    const std::uint64_t n = io::read_u64(in);
    if (m == 0 || n == 0 || m > (1ULL << 24) || n > (1ULL << 24)) {
        throw std::runtime_error("TRBM1 container: implausible dimensions");
    }
    LayerParams p;
    p.w = RealMatrix(m, n);
    for (double& x : p.w.data()) x = io::read_f64(in);
    p.a.resize(m);
    for (double& x : p.a) x = io::read_f64(in);
    p.b.resize(n);
    for (double& x : p.b) x = io::read_f64(in);
    const double t = io::read_f64(in);
    if (!(t > 0.0)) throw std::runtime_error("TRBM1 container: non-positive temperature");
    return RbmModel{std::move(p), Temperature(t)};
}

void save_rbm_file(const RbmModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    save_rbm(model, out);
}

RbmModel load_rbm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return load_rbm(in);
}

}  // namespace trbm
