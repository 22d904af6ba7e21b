#pragma once
// Reference implementations for tests. Everything here is written directly
// from the definitions with plain loops and shares no code with the library
// beyond the container types.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "shapeloss/grid.hpp"

namespace oracle {

using shapeloss::GridShape;
using shapeloss::LabelMask;
using shapeloss::ProbMap;

struct Descriptors {
    double volume = 0.0;
    double cx = 0.0, cy = 0.0;
    double dx = 0.0, dy = 0.0;
    double length = 0.0;
};

inline double prob(const ProbMap& p, std::size_t x, std::size_t y, std::size_t k) {
    return p.at(x * p.shape().width() + y, k);
}

// Neighbors by coordinate distance: 4-connected when max(|dx|,|dy|) == 1 and
// |dx| + |dy| == 1; 8-connected when max(|dx|,|dy|) == 1.
inline bool adjacent(long x1, long y1, long x2, long y2, bool eight) {
    const long ax = std::labs(x1 - x2);
    const long ay = std::labs(y1 - y2);
    if (std::max(ax, ay) != 1) return false;
    return eight || ax + ay == 1;
}

// Length over every unordered pixel pair, O(n^2).
inline double length(const ProbMap& p, std::size_t k, bool eight, double delta = -1.0) {
    const std::size_t H = p.shape().height(), W = p.shape().width();
    double sum = 0.0;
    for (std::size_t a = 0; a < H * W; ++a) {
        for (std::size_t b = a + 1; b < H * W; ++b) {
            if (!adjacent(long(a / W), long(a % W), long(b / W), long(b % W), eight)) continue;
            const double d = p.at(a, k) - p.at(b, k);
            sum += delta < 0.0 ? std::abs(d) : std::sqrt(d * d + delta);
        }
    }
    return sum;
}

inline Descriptors describe(const ProbMap& p, std::size_t k, bool eight, double delta = -1.0) {
    const std::size_t H = p.shape().height(), W = p.shape().width();
    Descriptors d;
    double sx = 0.0, sy = 0.0;
    for (std::size_t x = 0; x < H; ++x) {
        for (std::size_t y = 0; y < W; ++y) {
            const double s = prob(p, x, y, k);
            d.volume += s;
            sx += s * double(x);
            sy += s * double(y);
        }
    }
    if (d.volume > 0.0) {
        d.cx = sx / d.volume;
        d.cy = sy / d.volume;
        double vx = 0.0, vy = 0.0;
        for (std::size_t x = 0; x < H; ++x) {
            for (std::size_t y = 0; y < W; ++y) {
                const double s = prob(p, x, y, k);
                vx += s * (double(x) - d.cx) * (double(x) - d.cx);
                vy += s * (double(y) - d.cy) * (double(y) - d.cy);
            }
        }
        d.dx = std::sqrt(vx / d.volume);
        d.dy = std::sqrt(vy / d.volume);
    }
    d.length = length(p, k, eight, delta);
    return d;
}

// Integer-exact variant for hard masks: counts and sums in 64-bit integers.
struct MaskDescriptors {
    std::int64_t volume = 0;
    double cx = 0.0, cy = 0.0, dx = 0.0, dy = 0.0;
    std::int64_t length = 0;
};

inline MaskDescriptors describe_mask(const LabelMask& m, std::size_t k, bool eight) {
    const std::size_t H = m.shape().height(), W = m.shape().width();
    MaskDescriptors d;
    std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0;
    for (std::size_t x = 0; x < H; ++x) {
        for (std::size_t y = 0; y < W; ++y) {
            if (m.at(x * W + y) != k) continue;
            ++d.volume;
            sx += std::int64_t(x);
            sy += std::int64_t(y);
            sxx += std::int64_t(x * x);
            syy += std::int64_t(y * y);
        }
    }
    if (d.volume > 0) {
        const double n = double(d.volume);
        d.cx = double(sx) / n;
        d.cy = double(sy) / n;
        // n * var = sum x^2 - (sum x)^2 / n, evaluated exactly in integers first.
        const double vx = double(sxx * d.volume - sx * sx) / (n * n);
        const double vy = double(syy * d.volume - sy * sy) / (n * n);
        d.dx = std::sqrt(vx);
        d.dy = std::sqrt(vy);
    }
    for (std::size_t a = 0; a < H * W; ++a) {
        for (std::size_t b = a + 1; b < H * W; ++b) {
            if (!adjacent(long(a / W), long(a % W), long(b / W), long(b % W), eight)) continue;
            d.length += (m.at(a) == k) != (m.at(b) == k);
        }
    }
    return d;
}

// Random mask: spatially coherent blobs when `blobs` is set, iid noise otherwise.
inline LabelMask random_mask(std::mt19937_64& rng, GridShape shape, std::size_t K, bool blobs) {
    std::vector<std::uint8_t> labels(shape.pixel_count(), 0);
    std::uniform_int_distribution<std::size_t> cls(0, K - 1);
    if (!blobs) {
        for (auto& l : labels) l = std::uint8_t(cls(rng));
        return LabelMask(shape, K, std::move(labels));
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t H = shape.height(), W = shape.width();
    const int n = 1 + int(u(rng) * 4);
    for (int b = 0; b < n; ++b) {
        const double cx = u(rng) * double(H), cy = u(rng) * double(W);
        const double r = 0.5 + u(rng) * double(std::min(H, W)) / 2.0;
        const auto label = std::uint8_t(cls(rng));
        for (std::size_t x = 0; x < H; ++x) {
            for (std::size_t y = 0; y < W; ++y) {
                if ((double(x) - cx) * (double(x) - cx) + (double(y) - cy) * (double(y) - cy) <= r * r) {
                    labels[x * W + y] = label;
                }
            }
        }
    }
    return LabelMask(shape, K, std::move(labels));
}

// Random logits in [-scale, scale].
inline std::vector<double> random_logits(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> out(n);
    for (auto& v : out) v = u(rng);
    return out;
}

inline ProbMap random_probmap(std::mt19937_64& rng, GridShape shape, std::size_t K, double scale = 3.0) {
    return shapeloss::softmax(shapeloss::LogitField(shape, K, random_logits(rng, shape.pixel_count() * K, scale)));
}

// Central differences of f at x along every coordinate.
inline std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double old = x[n];
        x[n] = old + h;
        const double up = f(x);
        x[n] = old - h;
        const double down = f(x);
        x[n] = old;
        g[n] = (up - down) / (2.0 * h);
    }
    return g;
}

inline double max_rel_err(const std::vector<double>& analytic, const std::vector<double>& fd, double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t n = 0; n < fd.size(); ++n) {
        worst = std::max(worst, std::abs(analytic[n] - fd[n]) / std::max(std::abs(fd[n]), floor));
    }
    return worst;
}

}  // namespace oracle
