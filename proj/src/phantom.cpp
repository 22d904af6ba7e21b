#include "shapeloss/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "shapeloss/errors.hpp"

namespace shapeloss {

namespace {

constexpr std::uint8_t kBackground = 0;
constexpr std::uint8_t kBlob = 1;
constexpr std::uint8_t kRing = 2;
constexpr std::uint8_t kDisk = 3;

bool fits(const GridShape& g, const Vec2& center, const Vec2& radii) {
    return center[0] - radii[0] >= 0.0 && center[0] + radii[0] <= static_cast<double>(g.height() - 1) &&
           center[1] - radii[1] >= 0.0 && center[1] + radii[1] <= static_cast<double>(g.width() - 1);
}

bool in_ellipse(double x, double y, const Vec2& c, const Vec2& r) {
    const double u = (x - c[0]) / r[0];
    const double v = (y - c[1]) / r[1];
    return u * u + v * v <= 1.0;
}

double sq_dist(double x, double y, const Vec2& c) {
    return (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
}

std::vector<std::uint8_t> rasterize(const PhantomSpec& spec) {
    const auto& g = spec.grid;
    std::vector<std::uint8_t> labels(g.pixel_count(), kBackground);
    for (std::size_t i = 0; i < g.pixel_count(); ++i) {
        const auto c = coord_of(g, i);
        const double x = static_cast<double>(c.x);
        const double y = static_cast<double>(c.y);
        const bool blob = in_ellipse(x, y, spec.blob_center, spec.blob_radii);
        if (spec.kind == PhantomKind::Blob) {
            if (blob) labels[i] = kBlob;
            continue;
        }
        const double d2 = sq_dist(x, y, spec.heart_center);
        const bool disk = d2 <= spec.disk_radius * spec.disk_radius;
        const bool ring = !disk && d2 <= spec.ring_outer_radius * spec.ring_outer_radius;
        if (blob && (disk || ring)) throw InvalidArgument("phantom: blob overlaps the ring/disk");
        if (disk) labels[i] = kDisk;
        else if (ring) labels[i] = kRing;
        else if (blob) labels[i] = kBlob;
    }
    return labels;
}

std::vector<double> default_intensity(PhantomKind kind) {
    if (kind == PhantomKind::Cardiac) return {0.15, 0.75, 0.35, 0.85};
    return {0.45, 0.55};
}

}  // namespace

PhantomKind parse_phantom_kind(const std::string& name) {
    if (name == "cardiac") return PhantomKind::Cardiac;
    if (name == "blob") return PhantomKind::Blob;
    throw InvalidArgument("unknown phantom kind '" + name + "' (expected cardiac or blob)");
}

std::string phantom_kind_name(PhantomKind kind) { return kind == PhantomKind::Cardiac ? "cardiac" : "blob"; }

PhantomSpec default_cardiac_spec() { return PhantomSpec{}; }

PhantomSpec default_blob_spec() {
    PhantomSpec s;
    s.kind = PhantomKind::Blob;
    s.blob_center = {30.0, 34.0};
    s.blob_radii = {11.0, 15.0};
    s.noise_sigma = 0.05;
    return s;
}

Phantom generate(const PhantomSpec& input) {
    PhantomSpec spec = input;
    const std::size_t K = spec.kind == PhantomKind::Cardiac ? 4 : 2;
    if (spec.class_intensity.empty()) spec.class_intensity = default_intensity(spec.kind);
    if (spec.class_intensity.size() != K) throw InvalidArgument("phantom: need one intensity per class");
    if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("phantom: noise sigma must be >= 0");
    if (!(spec.blob_radii[0] > 0.0 && spec.blob_radii[1] > 0.0)) throw InvalidArgument("phantom: blob radii must be > 0");
    if (!fits(spec.grid, spec.blob_center, spec.blob_radii)) throw InvalidArgument("phantom: blob does not fit the grid");

    const auto lap = build_laplacian(spec.grid, spec.connectivity);
    std::vector<std::uint8_t> labels;
    if (spec.kind == PhantomKind::Cardiac) {
        if (!(spec.disk_radius >= 1.0)) throw InvalidArgument("phantom: disk radius must be >= 1");
        // Thinner rings can leak diagonally and would not enclose the disk.
        constexpr double kMinThickness = 2.0;
        constexpr int kMaxAttempts = 40;
        bool ok = false;
        for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
            if (spec.ring_outer_radius - spec.disk_radius < kMinThickness) {
                throw InvalidArgument("phantom: ring thicker than " + std::to_string(kMinThickness) +
                                      " px required, no ring satisfies the length-ratio window");
            }
            const double R = spec.ring_outer_radius;
            if (!fits(spec.grid, spec.heart_center, {R, R})) throw InvalidArgument("phantom: ring does not fit the grid");
            labels = rasterize(spec);
            const LabelMask mask(spec.grid, K, labels);
            const auto d = describe(mask, *lap);
            const double ratio = d.classes[kRing].length / d.classes[kDisk].length;
            if (ratio < spec.min_length_ratio) {
                spec.ring_outer_radius += 0.5;
            } else if (ratio > spec.max_length_ratio) {
                spec.ring_outer_radius -= 0.5;
            } else {
                ok = true;
            }
        }
        if (!ok) throw InvalidArgument("phantom: could not bring the ring/disk length ratio into its window");
    } else {
        labels = rasterize(spec);
    }

    LabelMask mask(spec.grid, K, std::move(labels));
    GrayImage image{spec.grid, std::vector<double>(spec.grid.pixel_count())};
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    for (std::size_t i = 0; i < spec.grid.pixel_count(); ++i) {
        double v = spec.class_intensity[mask.at(i)];
        if (spec.noise_sigma > 0.0) v += noise(rng);
        image.values[i] = std::clamp(v, 0.0, 1.0);
    }
    auto targets = describe(mask, *lap);
    return Phantom{std::move(spec), std::move(mask), std::move(image), std::move(targets)};
}

std::vector<std::string> class_names(PhantomKind kind) {
    if (kind == PhantomKind::Cardiac) return {"bg", "RV", "Myo", "LV"};
    return {"bg", "blob"};
}

std::vector<std::string> generic_class_names(std::size_t num_classes) {
    std::vector<std::string> out{"bg"};
    for (std::size_t k = 1; k < num_classes; ++k) out.push_back("class" + std::to_string(k));
    return out;
}

}  // namespace shapeloss
