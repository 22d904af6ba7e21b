#pragma once

// Shape moments and the descriptor family built on them: volume, centroid,
// spread (per-axis standard deviation) and Potts boundary length, plus
// ratios of descriptors between two classes.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapeloss/grid.hpp"

namespace shapeloss {

// Mass at or below which centroid and spread are undefined.
inline constexpr double kMassEpsilon = 1e-8;
// Default delta for the smooth |d| ~ sqrt(d^2 + delta) relaxation.
inline constexpr double kSmoothAbsDelta = 1e-6;

using Vec2 = std::array<double, 2>;

enum class Connectivity { Four, Eight };

struct Edge {
    std::uint32_t i;
    std::uint32_t j;  // always i < j
};

// Off-diagonal support of the grid Laplacian: the neighbor graph. Depends
// only on the shape and connectivity.
class LaplacianCache {
public:
    LaplacianCache(GridShape shape, Connectivity connectivity);

    const GridShape& shape() const noexcept { return shape_; }
    Connectivity connectivity() const noexcept { return connectivity_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const std::uint32_t> degree() const noexcept { return degree_; }

private:
    GridShape shape_;
    Connectivity connectivity_;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> degree_;
};

// Memoized per (shape, connectivity); thread-safe. Repeated calls return the
// same object.
std::shared_ptr<const LaplacianCache> build_laplacian(GridShape shape, Connectivity connectivity = Connectivity::Eight);

struct MomentOrder {
    unsigned p;
    unsigned q;
};

enum class Descriptor { Volume, Centroid, Spread, Length };

// |d| in the length term: exact absolute value, or sqrt(d^2 + delta).
enum class AbsMode { Exact, Smooth };

struct AbsOptions {
    AbsMode mode = AbsMode::Exact;
    double delta = kSmoothAbsDelta;
};

bool is_pair_valued(Descriptor f) noexcept;
std::string descriptor_symbol(Descriptor f);  // "V", "C", "D", "L"
Descriptor parse_descriptor(const std::string& symbol);

double shape_moment(const ProbMap& probs, std::size_t k, MomentOrder order);

// Throws DegenerateClassError when the class mass is <= kMassEpsilon.
double central_moment(const ProbMap& probs, std::size_t k, MomentOrder order);

double volume(const ProbMap& probs, std::size_t k);
Vec2 centroid(const ProbMap& probs, std::size_t k);
Vec2 spread(const ProbMap& probs, std::size_t k);

// Each unordered edge counted once. The literal double sum over the
// symmetric adjacency is exactly twice this value.
double length(const ProbMap& probs, std::size_t k, const LaplacianCache& lap, AbsOptions abs = {});

struct RatioOptions {
    std::size_t component = 0;    // for pair-valued descriptors
    bool allow_pair = false;      // centroid/spread ratios are opt-in
    AbsOptions abs = {};
};

// f(k) / f(l). Throws DegenerateClassError if the denominator is <= kMassEpsilon.
double ratio(const ProbMap& probs, Descriptor f, std::size_t k, std::size_t l, const LaplacianCache& lap,
             RatioOptions opts = {});

// Raw per-class sums used by describe and by the gradient code.
// Per-class moments. First-order sums are taken about `origin`, the
// top-left corner of the class's support, so every sum is unchanged when the
// map is translated.
struct ClassMoments {
    double m00 = 0.0;
    double m10 = 0.0;
    double m01 = 0.0;
    Vec2 origin{0.0, 0.0};
    double c20 = 0.0;  // central, zero when the class is degenerate
    double c02 = 0.0;

    Vec2 center() const noexcept { return {origin[0] + m10 / m00, origin[1] + m01 / m00}; }
};

std::vector<ClassMoments> class_moments(const ProbMap& probs);
std::vector<double> class_lengths(const ProbMap& probs, const LaplacianCache& lap, AbsOptions abs = {});

struct ClassDescriptors {
    double volume = 0.0;
    std::optional<Vec2> centroid;  // absent when mass <= kMassEpsilon
    std::optional<Vec2> spread;
    double length = 0.0;

    bool present() const noexcept { return centroid.has_value(); }
};

ClassDescriptors class_descriptors(const ClassMoments& m, double length);

struct RatioRequest {
    Descriptor f;
    std::size_t k;
    std::size_t l;
    std::size_t component = 0;
};

struct RatioValue {
    RatioRequest request;
    std::optional<double> value;  // absent if the denominator vanishes
};

struct DescriptorSet {
    std::vector<ClassDescriptors> classes;
    std::vector<RatioValue> ratios;

    std::size_t num_classes() const noexcept { return classes.size(); }
};

// Scalar view of one descriptor component. Returns nullopt for centroid or
// spread of an absent class.
std::optional<double> descriptor_value(const ClassDescriptors& c, Descriptor f, std::size_t component);

DescriptorSet describe(const ProbMap& probs, const LaplacianCache& lap, std::span<const RatioRequest> ratios = {},
                       AbsOptions abs = {});
DescriptorSet describe(const LabelMask& mask, const LaplacianCache& lap, std::span<const RatioRequest> ratios = {});

}  // namespace shapeloss
