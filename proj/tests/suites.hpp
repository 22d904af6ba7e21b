#pragma once
// Randomized verification suites shared by the unit tests (small counts) and
// the acceptance binary (full counts). Each returns its worst observed error
// so callers can print and threshold it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "oracles.hpp"
#include "shapeloss/constraints.hpp"
#include "shapeloss/descriptors.hpp"
#include "shapeloss/gradients.hpp"

namespace suites {

using namespace shapeloss;

struct DescriptorOracleResult {
    std::size_t masks = 0;
    double max_err = 0.0;      // centroid, spread, length against brute force
    bool volume_exact = true;  // V equals the integer pixel count
    bool length_exact = true;
};

inline DescriptorOracleResult descriptor_oracle(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DescriptorOracleResult r;
    for (std::size_t n = 0; n < count; ++n) {
        const GridShape g(4 + rng() % 29, 4 + rng() % 29);
        const std::size_t K = n % 2 == 0 ? 2 : 2 + rng() % 3;
        const bool eight = rng() % 2 == 0;
        const auto mask = oracle::random_mask(rng, g, K, rng() % 4 != 0);
        const auto lap = build_laplacian(g, eight ? Connectivity::Eight : Connectivity::Four);
        const auto d = describe(mask, *lap);
        for (std::size_t k = 0; k < K; ++k) {
            const auto want = oracle::describe_mask(mask, k, eight);
            const auto& c = d.classes[k];
            r.volume_exact = r.volume_exact && c.volume == double(want.volume);
            r.length_exact = r.length_exact && c.length == double(want.length);
            r.max_err = std::max(r.max_err, std::abs(c.length - double(want.length)));
            if (want.volume == 0) {
                r.volume_exact = r.volume_exact && !c.present();
                continue;
            }
            r.max_err = std::max({r.max_err, std::abs((*c.centroid)[0] - want.cx), std::abs((*c.centroid)[1] - want.cy),
                                  std::abs((*c.spread)[0] - want.dx), std::abs((*c.spread)[1] - want.dy)});
        }
        ++r.masks;
    }
    return r;
}

// A spec covering all four descriptors of every class, with bounds around a
// random target map so some entries are satisfied and some violated, plus a
// length ratio.
inline ConstraintSpec random_full_spec(std::mt19937_64& rng, GridShape g, std::size_t K,
                                       const LaplacianCache& lap) {
    const auto target = oracle::random_probmap(rng, g, K, 2.0);
    BoundsOptions bo;
    bo.slack = 0.05 + double(rng() % 100) / 400.0;
    ConstraintSpec spec;
    spec.entries = bounds_from_target(describe(target, lap), bo);
    spec.ratios.push_back({Descriptor::Length, 1, 2, 0, 0.8, 1.2});
    spec.ratios.push_back({Descriptor::Volume, 0, 1, 0, 0.5, 1.5});
    return spec;
}

struct GradientResult {
    std::size_t instances = 0;
    double max_rel_err = 0.0;
    double max_row_sum = 0.0;
};

// Analytic loss_grad against central differences of an independent loss
// evaluation (descriptors recomputed from scratch, then total_loss).
inline GradientResult gradient_fd(std::size_t count, std::uint64_t seed, double h = 1e-4, double delta = 1e-6) {
    std::mt19937_64 rng(seed);
    GradientResult r;
    const GridShape g(8, 8);
    constexpr std::size_t K = 3;
    const AbsOptions abs{AbsMode::Smooth, delta};
    LossOptions opts;
    opts.abs = abs;
    for (std::size_t n = 0; n < count; ++n) {
        const auto lap = build_laplacian(g, n % 2 == 0 ? Connectivity::Eight : Connectivity::Four);
        const auto spec = random_full_spec(rng, g, K, *lap);
        const double t = 1.0 + double(rng() % 2000) / 100.0;
        const auto z = oracle::random_logits(rng, g.pixel_count() * K, 2.0);
        const auto requests = spec.ratio_requests();
        auto loss_of = [&](const std::vector<double>& x) {
            const auto p = softmax(LogitField(g, K, x));
            return total_loss(describe(p, *lap, requests, abs), spec, t, opts.degeneracy);
        };
        const auto lg = loss_grad(LogitField(g, K, z), spec, t, *lap, opts);
        const auto fd = oracle::central_diff(loss_of, z, h);
        r.max_rel_err = std::max(r.max_rel_err, oracle::max_rel_err(lg.grad.values, fd));
        for (std::size_t i = 0; i < g.pixel_count(); ++i) {
            double row = 0.0;
            for (std::size_t k = 0; k < K; ++k) row += lg.grad.values[i * K + k];
            r.max_row_sum = std::max(r.max_row_sum, std::abs(row));
        }
        ++r.instances;
    }
    return r;
}

struct BarrierResult {
    double max_junction_gap = 0.0;
    double max_slope_gap = 0.0;
    std::size_t probes = 0;
    std::size_t convexity_failures = 0;
    std::size_t positivity_failures = 0;
};

inline BarrierResult barrier_suite(std::size_t probes, std::uint64_t seed) {
    BarrierResult r;
    for (double t : {1.0, 5.0, 25.0, 100.0}) {
        const double z = -1.0 / (t * t);
        const double log_branch = -std::log(-z) / t;
        const double lin_branch = t * z - std::log(1.0 / (t * t)) / t + 1.0 / t;
        r.max_junction_gap = std::max({r.max_junction_gap, std::abs(log_branch - lin_branch),
                                       std::abs(barrier(z, t) - barrier(std::nextafter(z, 0.0), t))});
        r.max_slope_gap = std::max({r.max_slope_gap, std::abs(-1.0 / (t * z) - t),
                                    std::abs(barrier_grad(z, t) - barrier_grad(std::nextafter(z, 0.0), t))});
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uz(-50.0, 50.0), ul(0.0, 1.0);
    const double ts[] = {1.0, 5.0, 25.0, 100.0};
    for (std::size_t n = 0; n < probes; ++n) {
        const double t = ts[n % 4];
        // Half the probes concentrate around the junction where the branches meet.
        const double scale = n % 2 == 0 ? 1.0 : 4.0 / (t * t * 50.0);
        double z1 = uz(rng) * scale, z2 = uz(rng) * scale;
        if (z1 > z2) std::swap(z1, z2);
        const double lam = ul(rng);
        const double lhs = barrier(lam * z1 + (1.0 - lam) * z2, t);
        const double rhs = lam * barrier(z1, t) + (1.0 - lam) * barrier(z2, t);
        r.convexity_failures += !(lhs <= rhs + 1e-12);
        r.positivity_failures += !(barrier_grad(z1, t) > 0.0 && barrier_grad(z2, t) > 0.0);
        ++r.probes;
    }
    return r;
}

struct InvarianceResult {
    std::size_t masks = 0;
    bool translation_exact = true;
    double max_linearity_err = 0.0;
};

inline LabelMask place(const LabelMask& m, GridShape big, std::size_t dx, std::size_t dy) {
    std::vector<std::uint8_t> labels(big.pixel_count(), 0);
    for (std::size_t i = 0; i < m.pixel_count(); ++i) {
        const auto c = coord_of(m.shape(), i);
        labels[index_of(big, {c.x + dx, c.y + dy})] = m.at(i);
    }
    return LabelMask(big, m.num_classes(), std::move(labels));
}

inline bool shift_within_rounding(Vec2 a, Vec2 b, std::size_t dx, std::size_t dy) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    return std::abs(b[0] - a[0] - double(dx)) <= 2.0 * eps * std::abs(b[0]) &&
           std::abs(b[1] - a[1] - double(dy)) <= 2.0 * eps * std::abs(b[1]);
}

// Masks are placed with a background margin so shifts never clip; the
// translated copy must reproduce V, D, L bit for bit. C is rebuilt as
// origin + offset, so its shift is exact up to the rounding of that final sum.
inline InvarianceResult invariance(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    InvarianceResult r;
    for (std::size_t n = 0; n < count; ++n) {
        const GridShape small(3 + rng() % 10, 3 + rng() % 10);
        const std::size_t K = 2 + rng() % 3;
        const auto m = oracle::random_mask(rng, small, K, true);
        const GridShape big(small.height() + 12, small.width() + 12);
        const std::size_t dx = rng() % 7, dy = rng() % 7;
        const auto a = place(m, big, 2, 2);
        const auto b = place(m, big, 2 + dx, 2 + dy);
        const auto lap = build_laplacian(big, n % 2 == 0 ? Connectivity::Eight : Connectivity::Four);
        const auto da = describe(a, *lap);
        const auto db = describe(b, *lap);
        for (std::size_t k = 1; k < K; ++k) {
            const auto& ca = da.classes[k];
            const auto& cb = db.classes[k];
            bool ok = ca.volume == cb.volume && ca.length == cb.length && ca.present() == cb.present();
            if (ok && ca.present()) {
                ok = *ca.spread == *cb.spread && shift_within_rounding(*ca.centroid, *cb.centroid, dx, dy);
            }
            r.translation_exact = r.translation_exact && ok;
        }

        const auto A = oracle::random_probmap(rng, small, K);
        const auto B = oracle::random_probmap(rng, small, K);
        const double alpha = double(rng() % 1001) / 1000.0;
        std::vector<double> mix(A.values().size());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * A.values()[i] + (1.0 - alpha) * B.values()[i];
        const ProbMap M(small, K, mix);
        for (std::size_t k = 0; k < K; ++k) {
            for (MomentOrder o : {MomentOrder{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}) {
                const double lhs = shape_moment(M, k, o);
                const double rhs = alpha * shape_moment(A, k, o) + (1.0 - alpha) * shape_moment(B, k, o);
                r.max_linearity_err = std::max(r.max_linearity_err, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
        }
        ++r.masks;
    }
    return r;
}

}  // namespace suites
