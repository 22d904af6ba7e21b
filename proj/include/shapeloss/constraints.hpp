#pragma once

// Bound constraints on descriptors enforced through the extended log-barrier
//
//   psi_t(z) = -(1/t) log(-z)                     if z <= -1/t^2
//            = t z - (1/t) log(1/t^2) + 1/t       otherwise
//
// which is C1, convex, strictly increasing and finite for every real z.
// A constraint lo <= v <= hi contributes psi_t(lo - v) + psi_t(v - hi).

#include <cstddef>
#include <string>
#include <vector>

#include "shapeloss/descriptors.hpp"

namespace shapeloss {

double barrier(double z, double t);
double barrier_grad(double z, double t);

struct BarrierParams {
    double t0 = 5.0;
    double growth = 1.1;
    double t_max = 100.0;

    // min(t0 * growth^epoch, t_max)
    double t_at(std::size_t epoch) const;
    void validate() const;
};

struct ConstraintEntry {
    Descriptor f;
    std::size_t k;
    std::size_t comp = 0;  // 0 = x (row), 1 = y (column) for pair-valued descriptors
    double lo;
    double hi;

    bool operator==(const ConstraintEntry&) const = default;
};

struct RatioEntry {
    Descriptor f;
    std::size_t k;  // numerator class
    std::size_t l;  // denominator class
    std::size_t comp = 0;
    double a;
    double b;

    bool operator==(const RatioEntry&) const = default;
};

// Strict weak orders used for the fixed summation order of the loss.
bool entry_less(const ConstraintEntry& a, const ConstraintEntry& b) noexcept;
bool ratio_less(const RatioEntry& a, const RatioEntry& b) noexcept;

struct ConstraintSpec {
    std::vector<ConstraintEntry> entries;
    std::vector<RatioEntry> ratios;
    BarrierParams barrier;
    bool allow_pair_ratios = false;

    bool empty() const noexcept { return entries.empty() && ratios.empty(); }

    // Throws ConfigError: lo > hi, a > b, class >= num_classes, bad component,
    // pair-valued ratio without allow_pair_ratios, invalid barrier params.
    void validate(std::size_t num_classes) const;

    // Copy with entries and ratios sorted by entry_less / ratio_less.
    ConstraintSpec canonical() const;

    std::vector<RatioRequest> ratio_requests() const;
};

// When a constrained class collapses, its centroid/spread/length entries stop
// contributing while the class mass is below activation_mass. Volume entries
// always stay active.
struct DegeneracyPolicy {
    bool suspend = true;
    double activation_mass = 0.5;
};

bool entry_active(const ConstraintEntry& e, const DescriptorSet& values, const DegeneracyPolicy& policy);
bool ratio_active(const RatioEntry& r, const DescriptorSet& values, const DegeneracyPolicy& policy);

struct BoundsOptions {
    double slack = 0.10;
    std::vector<std::size_t> classes;  // empty = every class
    std::vector<Descriptor> descriptors{Descriptor::Volume, Descriptor::Centroid, Descriptor::Spread,
                                        Descriptor::Length};
    double absent_volume = 1.0;  // absent classes get V in [0, absent_volume]
};

// [(1 - slack) tau, (1 + slack) tau] for every selected (descriptor, class,
// component). Throws InvalidArgument on negative slack.
std::vector<ConstraintEntry> bounds_from_target(const DescriptorSet& targets, const BoundsOptions& opts = {});

// Replaces class k's centroid bounds with class l's.
ConstraintSpec shared_centroid_prior(ConstraintSpec spec, std::size_t k, std::size_t l);

// Sum of barrier pairs over active entries, in canonical order. Entries with
// an undefined value under policy.suspend == false raise DegenerateClassError.
double total_loss(const DescriptorSet& values, const ConstraintSpec& spec, double t,
                  const DegeneracyPolicy& policy = {});

// Human-readable entry labels such as "V[1]", "C.y[3]", "R_L[2/3]".
std::string entry_label(const ConstraintEntry& e);
std::string ratio_label(const RatioEntry& r);

// JSON: {"entries":[{f,k,comp,lo,hi}], "ratios":[{f,k,l,a,b[,comp]}],
//        "barrier":{t0,growth,t_max}[, "allow_pair_ratios":bool]}
std::string spec_to_json(const ConstraintSpec& spec);
ConstraintSpec spec_from_json(const std::string& text);

}  // namespace shapeloss
