#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "suites.hpp"
#include "shapeloss/descriptors.hpp"
#include "shapeloss/errors.hpp"

using namespace shapeloss;

namespace {

ProbMap point_mass(GridShape g, std::size_t x, std::size_t y) {
    std::vector<std::uint8_t> labels(g.pixel_count(), 0);
    labels[index_of(g, {x, y})] = 1;
    return one_hot(LabelMask(g, 2, std::move(labels)));
}


}  // namespace

TEST_CASE("laplacian edge counts and degrees") {
    CHECK(build_laplacian(GridShape(1, 1), Connectivity::Eight)->edges().empty());
    CHECK(build_laplacian(GridShape(2, 2), Connectivity::Four)->edges().size() == 4);
    CHECK(build_laplacian(GridShape(2, 2), Connectivity::Eight)->edges().size() == 6);
    const auto lap = build_laplacian(GridShape(3, 3), Connectivity::Eight);
    CHECK(lap->edges().size() == 20);
    CHECK(lap->degree()[4] == 8);
    for (std::size_t corner : {0, 2, 6, 8}) CHECK(lap->degree()[corner] == 3);
    for (std::size_t mid : {1, 3, 5, 7}) CHECK(lap->degree()[mid] == 5);
}

TEST_CASE("laplacian matches coordinate adjacency, no duplicates, degree law") {
    for (auto conn : {Connectivity::Four, Connectivity::Eight}) {
        for (std::size_t h = 1; h <= 5; ++h) {
            for (std::size_t w = 1; w <= 5; ++w) {
                const GridShape g(h, w);
                const auto lap = build_laplacian(g, conn);
                std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
                for (const auto& e : lap->edges()) {
                    CHECK(e.i < e.j);
                    CHECK(seen.insert({e.i, e.j}).second);
                    CHECK(oracle::adjacent(long(e.i / w), long(e.i % w), long(e.j / w), long(e.j % w),
                                           conn == Connectivity::Eight));
                }
                std::size_t expected = 0;
                for (std::size_t a = 0; a < h * w; ++a) {
                    for (std::size_t b = a + 1; b < h * w; ++b) {
                        expected += oracle::adjacent(long(a / w), long(a % w), long(b / w), long(b % w),
                                                     conn == Connectivity::Eight);
                    }
                }
                CHECK(lap->edges().size() == expected);
                std::size_t deg = 0;
                for (auto d : lap->degree()) deg += d;
                CHECK(deg == 2 * lap->edges().size());
            }
        }
    }
    CHECK(build_laplacian(GridShape(6, 4)) == build_laplacian(GridShape(6, 4)));
}

TEST_CASE("shape and central moment examples") {
    const auto p = point_mass(GridShape(6, 5), 3, 2);
    CHECK(shape_moment(p, 1, {1, 0}) == 3.0);
    CHECK(shape_moment(p, 1, {0, 1}) == 2.0);
    CHECK(central_moment(p, 1, {2, 0}) == 0.0);

    std::mt19937_64 rng(1);
    const auto r = oracle::random_probmap(rng, GridShape(4, 4), 3);
    double brute = 0.0;
    for (std::size_t x = 0; x < 4; ++x) {
        for (std::size_t y = 0; y < 4; ++y) brute += oracle::prob(r, x, y, 2) * double(x * x) * double(y);
    }
    CHECK(std::abs(shape_moment(r, 2, {2, 1}) - brute) <= 1e-12);
    CHECK(std::abs(shape_moment(r, 1, {0, 0}) - volume(r, 1)) <= 0.0);
    CHECK(std::abs(central_moment(r, 0, {1, 0})) <= 1e-12);

    const auto two = one_hot(LabelMask(GridShape(3, 1), 2, {1, 0, 1}));
    CHECK(central_moment(two, 1, {2, 0}) == 2.0);
    CHECK(spread(two, 1)[0] == 1.0);
    CHECK(spread(two, 1)[1] == 0.0);

    const auto empty = one_hot(LabelMask(GridShape(2, 2), 2, {0, 0, 0, 0}));
    CHECK_THROWS_AS(central_moment(empty, 1, {2, 0}), DegenerateClassError);
    CHECK_THROWS_AS(centroid(empty, 1), DegenerateClassError);
}

TEST_CASE("volume, centroid and spread examples") {
    CHECK(volume(one_hot(LabelMask(GridShape(2, 2), 2, {1, 1, 1, 1})), 1) == 4.0);
    const auto u = ProbMap::uniform(GridShape(5, 8), 4);
    CHECK(volume(u, 3) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(centroid(u, 2)[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(centroid(u, 2)[1] == doctest::Approx(3.5).epsilon(1e-14));

    const auto p = point_mass(GridShape(9, 9), 5, 7);
    CHECK(centroid(p, 1) == Vec2{5.0, 7.0});
    CHECK(spread(p, 1) == Vec2{0.0, 0.0});
}

TEST_CASE("length examples") {
    const auto lap4 = build_laplacian(GridShape(7, 7), Connectivity::Four);
    CHECK(length(ProbMap::uniform(GridShape(7, 7), 2), 1, *lap4) == 0.0);
    CHECK(length(point_mass(GridShape(7, 7), 3, 3), 1, *lap4) == 4.0);
    for (std::size_t r = 1; r <= 4; ++r) {
        std::vector<std::uint8_t> labels(49, 0);
        for (std::size_t x = 1; x < 1 + r; ++x) {
            for (std::size_t y = 2; y < 2 + r; ++y) labels[x * 7 + y] = 1;
        }
        CHECK(length(one_hot(LabelMask(GridShape(7, 7), 2, labels)), 1, *lap4) == double(4 * r));
    }
    CHECK_THROWS_AS(length(ProbMap::uniform(GridShape(3, 3), 2), 1, *lap4), InvalidArgument);
}

TEST_CASE("ratio examples") {
    const auto lap = build_laplacian(GridShape(4, 4));
    std::vector<std::uint8_t> labels(16, 0);
    for (std::size_t i = 0; i < 8; ++i) labels[i] = 1;
    for (std::size_t i = 8; i < 12; ++i) labels[i] = 2;
    const auto p = one_hot(LabelMask(GridShape(4, 4), 3, labels));
    CHECK(ratio(p, Descriptor::Volume, 1, 2, *lap) == 2.0);
    CHECK(ratio(p, Descriptor::Length, 1, 1, *lap) == 1.0);
    CHECK_THROWS_AS(ratio(p, Descriptor::Centroid, 1, 2, *lap), InvalidArgument);
    RatioOptions pair;
    pair.allow_pair = true;
    CHECK(ratio(p, Descriptor::Centroid, 1, 2, *lap, pair) == doctest::Approx(0.5 / 2.0));

    const auto only_bg = one_hot(LabelMask(GridShape(4, 4), 3, std::vector<std::uint8_t>(16, 0)));
    CHECK_THROWS_AS(ratio(only_bg, Descriptor::Volume, 0, 1, *lap), DegenerateClassError);
}

TEST_CASE("describe flags absent classes and matches brute force on random soft maps") {
    const auto lap = build_laplacian(GridShape(5, 6));
    std::vector<std::uint8_t> labels(30, 0);
    labels[7] = 2;
    const auto d = describe(LabelMask(GridShape(5, 6), 3, labels), *lap);
    CHECK(d.classes[1].volume == 0.0);
    CHECK_FALSE(d.classes[1].present());
    CHECK(d.classes[2].present());
    CHECK(d.classes[0].volume == 29.0);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const GridShape g(3 + rng() % 6, 3 + rng() % 6);
        const std::size_t K = 2 + rng() % 3;
        const bool eight = trial % 2 == 0;
        const auto lp = build_laplacian(g, eight ? Connectivity::Eight : Connectivity::Four);
        const auto p = oracle::random_probmap(rng, g, K);
        const auto got = describe(p, *lp);
        const auto smooth = describe(p, *lp, {}, {AbsMode::Smooth, 1e-3});
        for (std::size_t k = 0; k < K; ++k) {
            const auto want = oracle::describe(p, k, eight);
            const auto& c = got.classes[k];
            CHECK(std::abs(c.volume - want.volume) <= 1e-9);
            CHECK(std::abs((*c.centroid)[0] - want.cx) <= 1e-9);
            CHECK(std::abs((*c.centroid)[1] - want.cy) <= 1e-9);
            CHECK(std::abs((*c.spread)[0] - want.dx) <= 1e-9);
            CHECK(std::abs((*c.spread)[1] - want.dy) <= 1e-9);
            CHECK(std::abs(c.length - want.length) <= 1e-9);
            CHECK(std::abs(smooth.classes[k].length - oracle::length(p, k, eight, 1e-3)) <= 1e-9);
        }
    }
}

TEST_CASE("near-binary soft map is within 1% of its hardened version") {
    std::mt19937_64 rng(23);
    const GridShape g(16, 16);
    const auto lap = build_laplacian(g);
    const auto mask = oracle::random_mask(rng, g, 3, true);
    std::vector<double> logits(g.pixel_count() * 3, 0.0);
    for (std::size_t i = 0; i < g.pixel_count(); ++i) logits[i * 3 + mask.at(i)] = 12.0;
    const auto soft = softmax(LogitField(g, 3, logits));
    const auto a = describe(soft, *lap);
    const auto b = describe(one_hot(argmax_labels(soft)), *lap);
    for (std::size_t k = 0; k < 3; ++k) {
        if (!b.classes[k].present()) continue;
        for (Descriptor f : {Descriptor::Volume, Descriptor::Centroid, Descriptor::Spread, Descriptor::Length}) {
            for (std::size_t comp = 0; comp < (is_pair_valued(f) ? 2u : 1u); ++comp) {
                const double x = *descriptor_value(a.classes[k], f, comp);
                const double y = *descriptor_value(b.classes[k], f, comp);
                CHECK(std::abs(x - y) <= 0.01 * std::max(std::abs(y), 1.0));
            }
        }
    }
}

TEST_CASE("moment linearity, translation and monotone mass") {
    std::mt19937_64 rng(29);
    const GridShape g(7, 5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto A = oracle::random_probmap(rng, g, 3);
        const auto B = oracle::random_probmap(rng, g, 3);
        const double alpha = double(rng() % 1000) / 1000.0;
        std::vector<double> mix(A.values().size());
        for (std::size_t n = 0; n < mix.size(); ++n) {
            mix[n] = alpha * A.values()[n] + (1.0 - alpha) * B.values()[n];
        }
        const ProbMap M(g, 3, mix);
        for (std::size_t k = 0; k < 3; ++k) {
            for (MomentOrder o : {MomentOrder{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 1}}) {
                const double lhs = shape_moment(M, k, o);
                const double rhs = alpha * shape_moment(A, k, o) + (1.0 - alpha) * shape_moment(B, k, o);
                CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
            }
        }

        std::vector<double> bumped(B.values().begin(), B.values().end());
        const std::size_t i = rng() % g.pixel_count();
        const double before = volume(B, 1);
        bumped[i * 3 + 1] += 0.01 * (1.0 - bumped[i * 3 + 1]);
        bumped[i * 3 + 0] = 1.0 - bumped[i * 3 + 1] - bumped[i * 3 + 2];
        if (bumped[i * 3 + 0] >= 0.0) CHECK(volume(ProbMap(g, 3, bumped), 1) > before);
    }

    const auto inv = suites::invariance(40, 31);
    CHECK(inv.masks == 40);
    CHECK(inv.translation_exact);
    CHECK(inv.max_linearity_err <= 1e-9);
}
