#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "trbm/deep.hpp"
#include "trbm/numerics.hpp"

using namespace trbm;

namespace {

LayerParams layer_of(std::size_t m, std::size_t n, double fill) {
    LayerParams p;
    p.w = RealMatrix(m, n);
    for (double& x : p.w.data()) x = fill;
    p.a.assign(m, 0.0);
    p.b.assign(n, 0.0);
    return p;
}

StackedModel stack_of(std::vector<LayerParams> layers, StackKind kind, double t,
                      TemperingMode mode = TemperingMode::Literal) {
    StackedModel s;
    s.layers = std::move(layers);
    s.kind = kind;
    s.temperature = Temperature(t);
    s.tempering = mode;
    return s;
}

StackedModel random_stack(const std::vector<std::size_t>& sizes, StackKind kind, double t,
                          std::uint64_t seed) {
    RngState rng(seed);
    std::vector<LayerParams> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        LayerParams p = layer_of(sizes[l], sizes[l + 1], 0.0);
        for (double& x : p.w.data()) x = rng.next_gaussian();
        for (double& x : p.a) x = rng.next_gaussian();
        for (double& x : p.b) x = rng.next_gaussian();
        layers.push_back(std::move(p));
    }
    return stack_of(std::move(layers), kind, t);
}

}  // namespace

TEST_CASE("StackedModel validation") {
    StackedModel empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

    StackedModel bad = stack_of({layer_of(4, 3, 0.0), layer_of(2, 5, 0.0)}, StackKind::DBM, 1.0);
    CHECK_THROWS_AS(bad.validate(), DimensionError);

    StackedModel good = stack_of({layer_of(4, 3, 0.0), layer_of(3, 5, 0.0)}, StackKind::DBM, 1.0);
    CHECK_NOTHROW(good.validate());
    CHECK(good.input_size() == 4);
    CHECK(good.layer_count() == 2);
    CHECK(good.layer_rbm(1).visible_size() == 3);
    CHECK_THROWS_AS(good.layer_rbm(2), std::out_of_range);
}

TEST_CASE("dbm_energy trivial states") {
    StackedModel s = stack_of({layer_of(2, 2, 1.0), layer_of(2, 2, 1.0)}, StackKind::DBM, 1.0);
    CHECK(dbm_energy(s, BitVector{0, 0}, BitVector{0, 0}, BitVector{0, 0}) == 0.0);
    // h1 = 0 decouples: every interaction term contains h1
    CHECK(dbm_energy(s, BitVector{1, 1}, BitVector{0, 0}, BitVector{1, 1}) == 0.0);
    // all-ones, all weights 1: -(4 + 4)
    CHECK(dbm_energy(s, BitVector{1, 1}, BitVector{1, 1}, BitVector{1, 1}) == -8.0);
}

TEST_CASE("dbm_energy additivity and errors") {
    StackedModel s = random_stack({3, 2, 4}, StackKind::DBM, 1.0, 17);
    const BitVector v{1, 0, 1}, h1{1, 1}, h2{0, 1, 1, 0};

    double pair1 = 0.0, pair2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) pair1 -= v[i] * h1[j] * s.layers[0].w(i, j);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) pair2 -= h1[i] * h2[j] * s.layers[1].w(i, j);
    CHECK(dbm_energy(s, v, h1, h2) == doctest::Approx(pair1 + pair2).epsilon(1e-14));

    StackedModel dbn = random_stack({3, 2, 4}, StackKind::DBN, 1.0, 17);
    CHECK_THROWS_AS(dbm_energy(dbn, v, h1, h2), std::invalid_argument);
    CHECK_THROWS_AS(dbm_energy(s, BitVector{1, 0}, h1, h2), DimensionError);
}

TEST_CASE("dbm_hidden1_conditional literal substitution") {
    // 1-1-1 model, w1 = 2, w2 = 1, v = h2 = 1, T = 0.5 -> sigmoid(2/0.5 + 1)
    StackedModel s = stack_of({layer_of(1, 1, 2.0), layer_of(1, 1, 1.0)}, StackKind::DBM, 0.5);
    const RealVector p = dbm_hidden1_conditional(s, BitVector{1}, BitVector{1});
    CHECK(p[0] == doctest::Approx(sigmoid(5.0)).epsilon(1e-15));

    // zero weights -> 0.5 for any T
    StackedModel z = stack_of({layer_of(1, 1, 0.0), layer_of(1, 1, 0.0)}, StackKind::DBM, 0.25);
    CHECK(dbm_hidden1_conditional(z, BitVector{1}, BitVector{1})[0] == 0.5);
}

TEST_CASE("literal vs uniform tempering") {
    const BitVector v{1}, h2{1};

    // T = 1: the two modes coincide exactly
    for (TemperingMode mode : {TemperingMode::Literal, TemperingMode::Uniform}) {
        StackedModel s =
            stack_of({layer_of(1, 1, 2.0), layer_of(1, 1, 1.0)}, StackKind::DBM, 1.0, mode);
        CHECK(dbm_hidden1_conditional(s, v, h2)[0] == doctest::Approx(sigmoid(3.0)).epsilon(1e-15));
    }

    // T != 1 with a nonzero top-down term: modes differ
    StackedModel lit =
        stack_of({layer_of(1, 1, 2.0), layer_of(1, 1, 1.0)}, StackKind::DBM, 0.5,
                 TemperingMode::Literal);
    StackedModel uni =
        stack_of({layer_of(1, 1, 2.0), layer_of(1, 1, 1.0)}, StackKind::DBM, 0.5,
                 TemperingMode::Uniform);
    const double p_lit = dbm_hidden1_conditional(lit, v, h2)[0];
    const double p_uni = dbm_hidden1_conditional(uni, v, h2)[0];
    CHECK(p_lit == doctest::Approx(sigmoid(4.0 + 1.0)).epsilon(1e-15));
    CHECK(p_uni == doctest::Approx(sigmoid(4.0 + 2.0)).epsilon(1e-15));
    CHECK(p_lit != p_uni);

    // T != 1 but h2 contributes nothing: modes agree again
    StackedModel lit0 =
        stack_of({layer_of(1, 1, 2.0), layer_of(1, 1, 1.0)}, StackKind::DBM, 0.5,
                 TemperingMode::Literal);
    StackedModel uni0 =
        stack_of({layer_of(1, 1, 2.0), layer_of(1, 1, 1.0)}, StackKind::DBM, 0.5,
                 TemperingMode::Uniform);
    CHECK(dbm_hidden1_conditional(lit0, v, BitVector{0})[0] ==
          dbm_hidden1_conditional(uni0, v, BitVector{0})[0]);
}

TEST_CASE("dbm_hidden2_conditional") {
    // w2 = 3, h1 = (1), T = 2 -> sigmoid(1.5)
    StackedModel s = stack_of({layer_of(1, 1, 0.0), layer_of(1, 1, 3.0)}, StackKind::DBM, 2.0);
    CHECK(dbm_hidden2_conditional(s, BitVector{1})[0] ==
          doctest::Approx(sigmoid(1.5)).epsilon(1e-15));

    StackedModel z = stack_of({layer_of(1, 1, 0.0), layer_of(1, 2, 0.0)}, StackKind::DBM, 0.3);
    CHECK(dbm_hidden2_conditional(z, BitVector{1}) == RealVector{0.5, 0.5});
}

TEST_CASE("dbm_visible_conditional ignores temperature") {
    // 2x1 model w1 = (1, -1)^T, h1 = (1)
    LayerParams w1 = layer_of(2, 1, 0.0);
    w1.w(0, 0) = 1.0;
    w1.w(1, 0) = -1.0;

    RealVector at_t1, at_t01;
    {
        StackedModel s = stack_of({w1, layer_of(1, 1, 0.5)}, StackKind::DBM, 1.0);
        at_t1 = dbm_visible_conditional(s, BitVector{1});
    }
    {
        StackedModel s = stack_of({w1, layer_of(1, 1, 0.5)}, StackKind::DBM, 0.1);
        at_t01 = dbm_visible_conditional(s, BitVector{1});
    }
    CHECK(at_t1[0] == doctest::Approx(sigmoid(1.0)).epsilon(1e-15));
    CHECK(at_t1[1] == doctest::Approx(sigmoid(-1.0)).epsilon(1e-15));
    CHECK(at_t1 == at_t01);
}

TEST_CASE("tempered conditionals at T = 1 match untempered forms") {
    StackedModel s = random_stack({3, 2, 2}, StackKind::DBM, 1.0, 29);
    const BitVector v{1, 0, 1}, h1{1, 0}, h2{0, 1};

    const RealVector p1 = dbm_hidden1_conditional(s, v, h2);
    for (std::size_t j = 0; j < 2; ++j) {
        double arg = 0.0;
        for (std::size_t i = 0; i < 3; ++i) arg += s.layers[0].w(i, j) * v[i];
        for (std::size_t z = 0; z < 2; ++z) arg += s.layers[1].w(j, z) * h2[z];
        CHECK(std::fabs(p1[j] - sigmoid(arg)) < 1e-15);
    }

    const RealVector p2 = dbm_hidden2_conditional(s, h1);
    for (std::size_t z = 0; z < 2; ++z) {
        double arg = 0.0;
        for (std::size_t i = 0; i < 2; ++i) arg += s.layers[1].w(i, z) * h1[i];
        CHECK(std::fabs(p2[z] - sigmoid(arg)) < 1e-15);
    }
}

TEST_CASE("train_stack validation and shape chain") {
    CHECK_THROWS_AS(train_stack({BitVector{1, 0}}, {2}, StackConfig{}, StackKind::DBN),
                    std::invalid_argument);
    CHECK_THROWS_AS(train_stack({}, {2, 3}, StackConfig{}, StackKind::DBN), std::invalid_argument);
    CHECK_THROWS_AS(train_stack({BitVector{1, 0, 1}}, {2, 3}, StackConfig{}, StackKind::DBN),
                    DimensionError);

    RngState rng(1);
    std::vector<BitVector> data;
    for (int i = 0; i < 20; ++i) data.push_back(sample_bernoulli(RealVector(8, 0.5), rng));

    StackConfig cfg;
    cfg.train.epochs = 2;
    cfg.train.seed = 3;
    const std::vector<std::size_t> sizes{8, 5, 4, 6};
    const StackedModel s = train_stack(data, sizes, cfg, StackKind::DBM);
    REQUIRE(s.layer_count() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(s.layers[l].visible_size() == sizes[l]);
        CHECK(s.layers[l].hidden_size() == sizes[l + 1]);
    }
    CHECK(s.kind == StackKind::DBM);
}

TEST_CASE("train_stack with one hidden layer reproduces train_rbm") {
    RngState rng(2);
    std::vector<BitVector> data;
    for (int i = 0; i < 25; ++i) data.push_back(sample_bernoulli(RealVector(6, 0.4), rng));

    StackConfig cfg;
    cfg.train.epochs = 4;
    cfg.train.seed = 11;
    cfg.train.temperature = 0.5;
    for (StackKind kind : {StackKind::DBN, StackKind::DBM}) {
        const StackedModel s = train_stack(data, {6, 4}, cfg, kind);
        const TrainResult r = train_rbm(data, 6, 4, cfg.train);
        CHECK(s.layers[0].w == r.model.params.w);
        CHECK(s.layers[0].a == r.model.params.a);
        CHECK(s.layers[0].b == r.model.params.b);
    }
}

TEST_CASE("train_stack determinism, including the sampled-propagation path") {
    RngState rng(4);
    std::vector<BitVector> data;
    for (int i = 0; i < 15; ++i) data.push_back(sample_bernoulli(RealVector(5, 0.5), rng));

    for (bool sampled : {false, true}) {
        StackConfig cfg;
        cfg.train.epochs = 2;
        cfg.train.seed = 21;
        cfg.propagate_samples = sampled;
        const StackedModel s1 = train_stack(data, {5, 4, 3}, cfg, StackKind::DBN);
        const StackedModel s2 = train_stack(data, {5, 4, 3}, cfg, StackKind::DBN);
        for (std::size_t l = 0; l < 2; ++l) CHECK(s1.layers[l].w == s2.layers[l].w);
    }
}

TEST_CASE("reconstruct trivial stack and purity") {
    StackedModel z = stack_of({layer_of(4, 3, 0.0), layer_of(3, 2, 0.0)}, StackKind::DBM, 1.0);
    CHECK(reconstruct(z, BitVector{1, 0, 1, 1}) == RealVector(4, 0.5));
    CHECK_THROWS_AS(reconstruct(z, BitVector{1, 0}), DimensionError);

    StackedModel s = random_stack({4, 3, 2}, StackKind::DBM, 0.7, 5);
    const RealVector r1 = reconstruct(s, BitVector{1, 1, 0, 0});
    const RealVector r2 = reconstruct(s, BitVector{1, 1, 0, 0});
    CHECK(r1 == r2);
    const RealVector r3 = reconstruct(s, BitVector{1, 1, 0, 0}, 3);
    CHECK(r3 == reconstruct(s, BitVector{1, 1, 0, 0}, 3));
}

TEST_CASE("stack trained to saturation reproduces the pattern") {
    const BitVector pattern{1, 0, 1, 1, 0, 0};
    const std::vector<BitVector> data(20, pattern);

    StackConfig cfg;
    cfg.train.epochs = 300;
    cfg.train.lambda = 0.0;
    cfg.train.seed = 6;
    cfg.train.batch_size = 10;
    for (StackKind kind : {StackKind::DBN, StackKind::DBM}) {
        const StackedModel s = train_stack(data, {6, 8, 8}, cfg, kind);
        const RealVector rec = reconstruct(s, pattern);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(std::fabs(rec[i] - static_cast<double>(pattern[i])) < 0.05);
        }
    }
}

TEST_CASE("TDBM1 round trip is bit exact") {
    StackedModel s = random_stack({5, 4, 3}, StackKind::DBM, 0.25, 77);
    s.bias_tempered = false;
    s.tempering = TemperingMode::Uniform;

    std::stringstream buf;
    save_stack(s, buf);
    const StackedModel back = load_stack(buf);
    CHECK(back.kind == s.kind);
    CHECK(back.layer_count() == 2);
    CHECK(back.temperature.value() == s.temperature.value());
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(back.layers[l].w == s.layers[l].w);
        CHECK(back.layers[l].a == s.layers[l].a);
        CHECK(back.layers[l].b == s.layers[l].b);
    }
}

TEST_CASE("TDBM1 rejects corrupt input") {
    std::stringstream bad_magic("NOPE!");
    CHECK_THROWS(load_stack(bad_magic));

    StackedModel s = random_stack({3, 2}, StackKind::DBN, 1.0, 1);
    std::stringstream buf;
    save_stack(s, buf);
    std::string bytes = buf.str();
    bytes.resize(bytes.size() / 2);  // truncate
    std::stringstream truncated(bytes);
    CHECK_THROWS(load_stack(truncated));
}

TEST_CASE("TDBM1 file round trip") {
    StackedModel s = random_stack({3, 2, 2}, StackKind::DBN, 2.0, 9);
    const std::string path = "test_stack_roundtrip.tdbm";
    save_stack_file(s, path);
    const StackedModel back = load_stack_file(path);
    CHECK(back.layers[1].w == s.layers[1].w);
    CHECK(back.kind == StackKind::DBN);
    std::remove(path.c_str());
    CHECK_THROWS(load_stack_file(path));
}
