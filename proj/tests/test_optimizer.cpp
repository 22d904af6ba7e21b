#include <doctest.h>

#include <cmath>

#include "shapeloss/errors.hpp"
#include "shapeloss/optimizer.hpp"
#include "shapeloss/phantom.hpp"

using namespace shapeloss;

TEST_CASE("adam first step and zero gradient") {
    AdamState s(3, 0.01, 0.9, 0.99, 1e-8);
    std::vector<double> p{1.0, -2.0, 0.5};
    const std::vector<double> g{0.3, -4.0, 0.0};
    adam_step(p, g, s);
    CHECK(s.step == 1);
    CHECK(std::abs(p[0] - (1.0 - 0.01 * 0.3 / (0.3 + 1e-8))) <= 1e-12);
    CHECK(std::abs(p[1] - (-2.0 + 0.01 * 4.0 / (4.0 + 1e-8))) <= 1e-12);
    CHECK(p[2] == 0.5);

    AdamState z(2, 0.01, 0.9, 0.99, 1e-8);
    std::vector<double> q{1.0, 2.0};
    adam_step(q, std::vector<double>{0.0, 0.0}, z);
    CHECK(q == std::vector<double>{1.0, 2.0});
    CHECK(z.step == 1);
}

TEST_CASE("adam constant gradient approaches lr * sign(g)") {
    AdamState s(2, 0.001, 0.9, 0.99, 1e-8);
    std::vector<double> p{0.0, 0.0};
    const std::vector<double> g{2.5, -0.1};
    std::vector<double> prev = p;
    for (int n = 0; n < 2000; ++n) {
        prev = p;
        adam_step(p, g, s);
    }
    CHECK(std::abs((prev[0] - p[0]) - 0.001) < 1e-8);
    CHECK(std::abs((p[1] - prev[1]) - 0.001) < 1e-8);
}

TEST_CASE("adam rejects non-finite gradients without side effects") {
    AdamState s(2, 0.01, 0.9, 0.99, 1e-8);
    std::vector<double> p{1.0, 1.0};
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{NAN, 0.0}, s), NumericalError);
    CHECK(s.step == 0);
    CHECK(p == std::vector<double>{1.0, 1.0});
}

TEST_CASE("empty spec leaves parameters untouched") {
    FreeField ff(GridShape(4, 4), 2);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.iterations_per_epoch = 5;
    const auto lap = build_laplacian(GridShape(4, 4));
    const auto rep = train(ff, ConstraintSpec{}, *lap, cfg);
    for (double v : ff.parameters()) CHECK(v == 0.0);
    for (const auto& r : rep.records) CHECK(r.loss == 0.0);
    CHECK(rep.all_satisfied());
}

TEST_CASE("volume-only training on the disk lands inside its bounds, deterministically") {
    auto spec_p = default_cardiac_spec();
    const auto ph = generate(spec_p);
    const auto lap = build_laplacian(ph.mask.shape());
    BoundsOptions bo;
    bo.classes = {3};
    bo.descriptors = {Descriptor::Volume};
    ConstraintSpec spec;
    spec.entries = bounds_from_target(ph.targets, bo);
    TrainConfig cfg;
    cfg.lr = 0.01;
    cfg.epochs = 10;
    cfg.iterations_per_epoch = 20;
    FreeField a(ph.mask.shape(), 4), b(ph.mask.shape(), 4);
    const auto ra = train(a, spec, *lap, cfg);
    const auto rb = train(b, spec, *lap, cfg);
    CHECK(ra.all_satisfied());
    const double v = ra.final_values.classes[3].volume;
    CHECK(v >= 0.9 * 197.0);
    CHECK(v <= 1.1 * 197.0);
    CHECK(training_log_jsonl(ra) == training_log_jsonl(rb));
    double prev_t = 0.0;
    for (const auto& r : ra.records) {
        CHECK(r.t >= prev_t);
        prev_t = r.t;
    }
}

TEST_CASE("coordnet parameter gradients match finite differences") {
    const auto ph = generate(default_blob_spec());
    const auto lap = build_laplacian(ph.mask.shape());
    ConstraintSpec spec;
    spec.entries = bounds_from_target(ph.targets);
    CoordNet net(ph.mask.shape(), 2, ph.image, 6, 3);
    LossOptions lo;
    lo.abs = {AbsMode::Smooth, 1e-6};
    const auto lg = loss_grad(net.forward(), spec, 5.0, *lap, lo);
    std::vector<double> g(net.parameters().size());
    net.backward(lg.grad, g);
    double worst = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        auto P = net.parameters();
        const double old = P[n];
        P[n] = old + 1e-5;
        const double up = loss_grad(net.forward(), spec, 5.0, *lap, lo).loss;
        P[n] = old - 1e-5;
        const double down = loss_grad(net.forward(), spec, 5.0, *lap, lo).loss;
        P[n] = old;
        const double fd = (up - down) / 2e-5;
        worst = std::max(worst, std::abs(fd - g[n]) / std::max(std::abs(fd), 1e-6));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.beta2 = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
