#include "shapeloss/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include "shapeloss/errors.hpp"

namespace shapeloss {

namespace {

double ipow(double base, unsigned e) noexcept {
    double r = 1.0;
    for (unsigned n = 0; n < e; ++n) r *= base;
    return r;
}

void check_class(const ProbMap& probs, std::size_t k) {
    if (k >= probs.num_classes()) {
        throw InvalidArgument("class " + std::to_string(k) + " out of range for K=" +
                              std::to_string(probs.num_classes()));
    }
}

double checked_mass(const ProbMap& probs, std::size_t k, const char* what) {
    const double m = shape_moment(probs, k, {0, 0});
    if (!(m > kMassEpsilon)) {
        throw DegenerateClassError(k, m,
                                   std::string(what) + " undefined: class " + std::to_string(k) + " has mass " +
                                       std::to_string(m));
    }
    return m;
}

double abs_value(double d, const AbsOptions& abs) noexcept {
    return abs.mode == AbsMode::Exact ? std::abs(d) : std::sqrt(d * d + abs.delta);
}

}  // namespace

LaplacianCache::LaplacianCache(GridShape shape, Connectivity connectivity)
    : shape_(shape), connectivity_(connectivity), degree_(shape.pixel_count(), 0) {
    const std::size_t H = shape.height();
    const std::size_t W = shape.width();
    if (shape.pixel_count() > std::size_t{0xFFFFFFFFu}) throw InvalidArgument("grid too large for 32-bit edges");
    auto add = [&](std::size_t a, std::size_t b) {
        edges_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
        ++degree_[a];
        ++degree_[b];
    };
    // Forward neighbors only, so every unordered pair appears once with i < j.
    for (std::size_t x = 0; x < H; ++x) {
        for (std::size_t y = 0; y < W; ++y) {
            const std::size_t i = x * W + y;
            if (y + 1 < W) add(i, i + 1);
            if (x + 1 < H) {
                if (connectivity == Connectivity::Eight && y > 0) add(i, i + W - 1);
                add(i, i + W);
                if (connectivity == Connectivity::Eight && y + 1 < W) add(i, i + W + 1);
            }
        }
    }
}

std::shared_ptr<const LaplacianCache> build_laplacian(GridShape shape, Connectivity connectivity) {
    using Key = std::tuple<std::size_t, std::size_t, int>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const LaplacianCache>> cache;

    const Key key{shape.height(), shape.width(), static_cast<int>(connectivity)};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    // Built outside the lock; a racing builder produces an identical object and
    // the first insert wins.
    auto built = std::make_shared<const LaplacianCache>(shape, connectivity);
    std::lock_guard lock(mutex);
    return cache.try_emplace(key, std::move(built)).first->second;
}

bool is_pair_valued(Descriptor f) noexcept { return f == Descriptor::Centroid || f == Descriptor::Spread; }

std::string descriptor_symbol(Descriptor f) {
    switch (f) {
        case Descriptor::Volume: return "V";
        case Descriptor::Centroid: return "C";
        case Descriptor::Spread: return "D";
        case Descriptor::Length: return "L";
    }
    return "?";
}

Descriptor parse_descriptor(const std::string& symbol) {
    if (symbol == "V") return Descriptor::Volume;
    if (symbol == "C") return Descriptor::Centroid;
    if (symbol == "D") return Descriptor::Spread;
    if (symbol == "L") return Descriptor::Length;
    throw InvalidArgument("unknown descriptor '" + symbol + "' (expected V, C, D or L)");
}

double shape_moment(const ProbMap& probs, std::size_t k, MomentOrder order) {
    check_class(probs, k);
    const std::size_t W = probs.shape().width();
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.pixel_count(); ++i) {
        const double s = probs.at(i, k);
        if (s == 0.0) continue;
        sum += s * ipow(static_cast<double>(i / W), order.p) * ipow(static_cast<double>(i % W), order.q);
    }
    return sum;
}

double central_moment(const ProbMap& probs, std::size_t k, MomentOrder order) {
    check_class(probs, k);
    const double m = checked_mass(probs, k, "central moment");
    const double cx = shape_moment(probs, k, {1, 0}) / m;
    const double cy = shape_moment(probs, k, {0, 1}) / m;
    const std::size_t W = probs.shape().width();
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.pixel_count(); ++i) {
        const double s = probs.at(i, k);
        if (s == 0.0) continue;
        sum += s * ipow(static_cast<double>(i / W) - cx, order.p) * ipow(static_cast<double>(i % W) - cy, order.q);
    }
    return sum;
}

double volume(const ProbMap& probs, std::size_t k) { return shape_moment(probs, k, {0, 0}); }

Vec2 centroid(const ProbMap& probs, std::size_t k) {
    check_class(probs, k);
    const double m = checked_mass(probs, k, "centroid");
    return {shape_moment(probs, k, {1, 0}) / m, shape_moment(probs, k, {0, 1}) / m};
}

Vec2 spread(const ProbMap& probs, std::size_t k) {
    check_class(probs, k);
    const double m = checked_mass(probs, k, "spread");
    // Negative radicands can only come from rounding.
    return {std::sqrt(std::max(0.0, central_moment(probs, k, {2, 0}) / m)),
            std::sqrt(std::max(0.0, central_moment(probs, k, {0, 2}) / m))};
}

double length(const ProbMap& probs, std::size_t k, const LaplacianCache& lap, AbsOptions abs) {
    check_class(probs, k);
    if (!(lap.shape() == probs.shape())) throw InvalidArgument("Laplacian shape does not match ProbMap shape");
    double sum = 0.0;
    for (const auto& e : lap.edges()) sum += abs_value(probs.at(e.i, k) - probs.at(e.j, k), abs);
    return sum;
}

double ratio(const ProbMap& probs, Descriptor f, std::size_t k, std::size_t l, const LaplacianCache& lap,
             RatioOptions opts) {
    if (is_pair_valued(f) && !opts.allow_pair) {
        throw InvalidArgument("ratio of pair-valued descriptor " + descriptor_symbol(f) +
                              " requires allow_pair");
    }
    if (opts.component > 1 || (!is_pair_valued(f) && opts.component != 0)) {
        throw InvalidArgument("invalid component for ratio of " + descriptor_symbol(f));
    }
    auto eval = [&](std::size_t c) -> double {
        switch (f) {
            case Descriptor::Volume: return volume(probs, c);
            case Descriptor::Length: return length(probs, c, lap, opts.abs);
            case Descriptor::Centroid: return centroid(probs, c)[opts.component];
            case Descriptor::Spread: return spread(probs, c)[opts.component];
        }
        return 0.0;
    };
    const double den = eval(l);
    if (!(std::abs(den) > kMassEpsilon)) {
        throw DegenerateClassError(l, den,
                                   "ratio " + descriptor_symbol(f) + "(" + std::to_string(k) + ")/" +
                                       descriptor_symbol(f) + "(" + std::to_string(l) + ") has vanishing denominator");
    }
    return eval(k) / den;
}

std::vector<ClassMoments> class_moments(const ProbMap& probs) {
    const std::size_t K = probs.num_classes();
    const std::size_t W = probs.shape().width();
    const std::size_t n = probs.pixel_count();
    const auto v = probs.values();
    std::vector<ClassMoments> out(K);
    constexpr auto kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> min_x(K, kNone), min_y(K, kNone);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = v.data() + i * K;
        for (std::size_t k = 0; k < K; ++k) {
            if (row[k] == 0.0) continue;
            min_x[k] = std::min(min_x[k], i / W);
            min_y[k] = std::min(min_y[k], i % W);
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (min_x[k] != kNone) out[k].origin = {static_cast<double>(min_x[k]), static_cast<double>(min_y[k])};
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = v.data() + i * K;
        for (std::size_t k = 0; k < K; ++k) {
            out[k].m00 += row[k];
            out[k].m10 += row[k] * (static_cast<double>(i / W) - out[k].origin[0]);
            out[k].m01 += row[k] * (static_cast<double>(i % W) - out[k].origin[1]);
        }
    }
    std::vector<Vec2> rel(K, Vec2{0.0, 0.0});
    for (std::size_t k = 0; k < K; ++k) {
        if (out[k].m00 > kMassEpsilon) rel[k] = {out[k].m10 / out[k].m00, out[k].m01 / out[k].m00};
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = v.data() + i * K;
        for (std::size_t k = 0; k < K; ++k) {
            const double dx = static_cast<double>(i / W) - out[k].origin[0] - rel[k][0];
            const double dy = static_cast<double>(i % W) - out[k].origin[1] - rel[k][1];
            out[k].c20 += row[k] * dx * dx;
            out[k].c02 += row[k] * dy * dy;
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (!(out[k].m00 > kMassEpsilon)) out[k].c20 = out[k].c02 = 0.0;
    }
    return out;
}

ClassDescriptors class_descriptors(const ClassMoments& m, double length) {
    ClassDescriptors c;
    c.volume = m.m00;
    c.length = length;
    if (m.m00 > kMassEpsilon) {
        c.centroid = m.center();
        // Negative radicands can only come from rounding.
        c.spread = Vec2{std::sqrt(std::max(0.0, m.c20 / m.m00)), std::sqrt(std::max(0.0, m.c02 / m.m00))};
    }
    return c;
}

std::vector<double> class_lengths(const ProbMap& probs, const LaplacianCache& lap, AbsOptions abs) {
    if (!(lap.shape() == probs.shape())) throw InvalidArgument("Laplacian shape does not match ProbMap shape");
    const std::size_t K = probs.num_classes();
    const auto v = probs.values();
    std::vector<double> out(K, 0.0);
    for (const auto& e : lap.edges()) {
        const double* a = v.data() + static_cast<std::size_t>(e.i) * K;
        const double* b = v.data() + static_cast<std::size_t>(e.j) * K;
        for (std::size_t k = 0; k < K; ++k) out[k] += abs_value(a[k] - b[k], abs);
    }
    return out;
}

std::optional<double> descriptor_value(const ClassDescriptors& c, Descriptor f, std::size_t component) {
    switch (f) {
        case Descriptor::Volume: return c.volume;
        case Descriptor::Length: return c.length;
        case Descriptor::Centroid:
            if (!c.centroid) return std::nullopt;
            return (*c.centroid)[component];
        case Descriptor::Spread:
            if (!c.spread) return std::nullopt;
            return (*c.spread)[component];
    }
    return std::nullopt;
}

DescriptorSet describe(const ProbMap& probs, const LaplacianCache& lap, std::span<const RatioRequest> ratios,
                       AbsOptions abs) {
    const auto moments = class_moments(probs);
    const auto lengths = class_lengths(probs, lap, abs);
    DescriptorSet out;
    out.classes.resize(probs.num_classes());
    for (std::size_t k = 0; k < probs.num_classes(); ++k) out.classes[k] = class_descriptors(moments[k], lengths[k]);
    for (const auto& r : ratios) {
        if (r.k >= probs.num_classes() || r.l >= probs.num_classes()) {
            throw InvalidArgument("ratio request references a class out of range");
        }
        RatioValue rv{r, std::nullopt};
        const auto num = descriptor_value(out.classes[r.k], r.f, r.component);
        const auto den = descriptor_value(out.classes[r.l], r.f, r.component);
        if (num && den && std::abs(*den) > kMassEpsilon) rv.value = *num / *den;
        out.ratios.push_back(rv);
    }
    return out;
}

DescriptorSet describe(const LabelMask& mask, const LaplacianCache& lap, std::span<const RatioRequest> ratios) {
    return describe(one_hot(mask), lap, ratios);
}

}  // namespace shapeloss
