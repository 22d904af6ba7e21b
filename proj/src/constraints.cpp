#include "shapeloss/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <tuple>

#include "shapeloss/errors.hpp"

namespace shapeloss {

double barrier(double z, double t) {
    if (z <= -1.0 / (t * t)) return -std::log(-z) / t;
    return t * z - std::log(1.0 / (t * t)) / t + 1.0 / t;
}

double barrier_grad(double z, double t) {
    if (z <= -1.0 / (t * t)) return -1.0 / (t * z);
    return t;
}

double BarrierParams::t_at(std::size_t epoch) const {
    return std::min(t0 * std::pow(growth, static_cast<double>(epoch)), t_max);
}

void BarrierParams::validate() const {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("barrier t0 must be > 0");
    if (!(growth >= 1.0) || !std::isfinite(growth)) throw ConfigError("barrier growth must be >= 1");
    if (!(t_max >= t0) || !std::isfinite(t_max)) throw ConfigError("barrier t_max must be >= t0");
}

bool entry_less(const ConstraintEntry& a, const ConstraintEntry& b) noexcept {
    return std::tuple(static_cast<int>(a.f), a.k, a.comp, a.lo, a.hi) <
           std::tuple(static_cast<int>(b.f), b.k, b.comp, b.lo, b.hi);
}

bool ratio_less(const RatioEntry& a, const RatioEntry& b) noexcept {
    return std::tuple(static_cast<int>(a.f), a.k, a.l, a.comp, a.a, a.b) <
           std::tuple(static_cast<int>(b.f), b.k, b.l, b.comp, b.a, b.b);
}

void ConstraintSpec::validate(std::size_t num_classes) const {
    barrier.validate();
    for (const auto& e : entries) {
        const auto label = entry_label(e);
        if (e.k >= num_classes) throw ConfigError(label + ": class out of range for K=" + std::to_string(num_classes));
        if (e.comp > (is_pair_valued(e.f) ? 1u : 0u)) throw ConfigError(label + ": invalid component");
        if (!std::isfinite(e.lo) || !std::isfinite(e.hi)) throw ConfigError(label + ": non-finite bound");
        if (e.lo > e.hi) throw ConfigError(label + ": lo > hi");
    }
    for (const auto& r : ratios) {
        const auto label = ratio_label(r);
        if (r.k >= num_classes || r.l >= num_classes) {
            throw ConfigError(label + ": class out of range for K=" + std::to_string(num_classes));
        }
        if (is_pair_valued(r.f) && !allow_pair_ratios) {
            throw ConfigError(label + ": pair-valued ratio requires allow_pair_ratios");
        }
        if (r.comp > (is_pair_valued(r.f) ? 1u : 0u)) throw ConfigError(label + ": invalid component");
        if (!std::isfinite(r.a) || !std::isfinite(r.b)) throw ConfigError(label + ": non-finite bound");
        if (r.a > r.b) throw ConfigError(label + ": a > b");
    }
}

ConstraintSpec ConstraintSpec::canonical() const {
    ConstraintSpec out = *this;
    std::sort(out.entries.begin(), out.entries.end(), entry_less);
    std::sort(out.ratios.begin(), out.ratios.end(), ratio_less);
    return out;
}

std::vector<RatioRequest> ConstraintSpec::ratio_requests() const {
    std::vector<RatioRequest> out;
    out.reserve(ratios.size());
    for (const auto& r : ratios) out.push_back({r.f, r.k, r.l, r.comp});
    return out;
}

bool entry_active(const ConstraintEntry& e, const DescriptorSet& values, const DegeneracyPolicy& policy) {
    if (e.f == Descriptor::Volume || !policy.suspend) return true;
    return values.classes.at(e.k).volume >= policy.activation_mass;
}

bool ratio_active(const RatioEntry& r, const DescriptorSet& values, const DegeneracyPolicy& policy) {
    if (!policy.suspend) return true;
    const auto& ck = values.classes.at(r.k);
    const auto& cl = values.classes.at(r.l);
    if (ck.volume < policy.activation_mass || cl.volume < policy.activation_mass) return false;
    const auto den = descriptor_value(cl, r.f, r.comp);
    if (!den || !(std::abs(*den) > kMassEpsilon)) return false;
    // A (near) constant map has no boundary; its length ratio is meaningless.
    if ((r.f == Descriptor::Volume || r.f == Descriptor::Length) && *den < policy.activation_mass) return false;
    return true;
}

std::vector<ConstraintEntry> bounds_from_target(const DescriptorSet& targets, const BoundsOptions& opts) {
    if (!(opts.slack >= 0.0)) throw InvalidArgument("slack must be non-negative");
    std::vector<std::size_t> classes = opts.classes;
    if (classes.empty()) {
        for (std::size_t k = 0; k < targets.num_classes(); ++k) classes.push_back(k);
    }
    std::vector<ConstraintEntry> out;
    for (std::size_t k : classes) {
        if (k >= targets.num_classes()) throw InvalidArgument("bounds_from_target: class out of range");
        const auto& c = targets.classes[k];
        if (!c.present()) {
            out.push_back({Descriptor::Volume, k, 0, 0.0, opts.absent_volume});
            continue;
        }
        for (Descriptor f : opts.descriptors) {
            const std::size_t ncomp = is_pair_valued(f) ? 2 : 1;
            for (std::size_t comp = 0; comp < ncomp; ++comp) {
                const double tau = *descriptor_value(c, f, comp);
                const double a = (1.0 - opts.slack) * tau;
                const double b = (1.0 + opts.slack) * tau;
                out.push_back({f, k, comp, std::min(a, b), std::max(a, b)});
            }
        }
    }
    return out;
}

ConstraintSpec shared_centroid_prior(ConstraintSpec spec, std::size_t k, std::size_t l) {
    for (std::size_t comp = 0; comp < 2; ++comp) {
        auto is_centroid = [&](std::size_t cls) {
            return [=](const ConstraintEntry& e) { return e.f == Descriptor::Centroid && e.k == cls && e.comp == comp; };
        };
        const auto src = std::find_if(spec.entries.begin(), spec.entries.end(), is_centroid(l));
        const auto dst = std::find_if(spec.entries.begin(), spec.entries.end(), is_centroid(k));
        if (src == spec.entries.end() || dst == spec.entries.end()) {
            throw InvalidArgument("shared_centroid_prior: classes " + std::to_string(k) + " and " + std::to_string(l) +
                                  " must both carry centroid entries");
        }
        dst->lo = src->lo;
        dst->hi = src->hi;
    }
    return spec;
}

double total_loss(const DescriptorSet& values, const ConstraintSpec& spec, double t, const DegeneracyPolicy& policy) {
    const auto canon = spec.canonical();
    double loss = 0.0;
    for (const auto& e : canon.entries) {
        if (!entry_active(e, values, policy)) continue;
        const auto v = descriptor_value(values.classes.at(e.k), e.f, e.comp);
        if (!v) {
            throw DegenerateClassError(e.k, values.classes.at(e.k).volume, entry_label(e) + ": class is degenerate");
        }
        loss += barrier(e.lo - *v, t) + barrier(*v - e.hi, t);
    }
    for (const auto& r : canon.ratios) {
        if (!ratio_active(r, values, policy)) continue;
        const auto num = descriptor_value(values.classes.at(r.k), r.f, r.comp);
        const auto den = descriptor_value(values.classes.at(r.l), r.f, r.comp);
        if (!num || !den || !(std::abs(*den) > kMassEpsilon)) {
            throw DegenerateClassError(r.l, values.classes.at(r.l).volume, ratio_label(r) + ": degenerate ratio");
        }
        const double q = *num / *den;
        loss += barrier(r.a - q, t) + barrier(q - r.b, t);
    }
    return loss;
}

std::string entry_label(const ConstraintEntry& e) {
    std::string s = descriptor_symbol(e.f);
    if (is_pair_valued(e.f)) s += e.comp == 0 ? ".x" : ".y";
    return s + "[" + std::to_string(e.k) + "]";
}

std::string ratio_label(const RatioEntry& r) {
    std::string s = "R_" + descriptor_symbol(r.f);
    if (is_pair_valued(r.f)) s += r.comp == 0 ? ".x" : ".y";
    return s + "[" + std::to_string(r.k) + "/" + std::to_string(r.l) + "]";
}

std::string spec_to_json(const ConstraintSpec& spec) {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : spec.entries) {
        j["entries"].push_back(
            {{"f", descriptor_symbol(e.f)}, {"k", e.k}, {"comp", e.comp}, {"lo", e.lo}, {"hi", e.hi}});
    }
    j["ratios"] = nlohmann::json::array();
    for (const auto& r : spec.ratios) {
        nlohmann::json jr = {{"f", descriptor_symbol(r.f)}, {"k", r.k}, {"l", r.l}, {"a", r.a}, {"b", r.b}};
        if (is_pair_valued(r.f)) jr["comp"] = r.comp;
        j["ratios"].push_back(jr);
    }
    j["barrier"] = {{"t0", spec.barrier.t0}, {"growth", spec.barrier.growth}, {"t_max", spec.barrier.t_max}};
    if (spec.allow_pair_ratios) j["allow_pair_ratios"] = true;
    return j.dump(2) + "\n";
}

ConstraintSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("constraint spec: ") + e.what(), e.byte);
    }
    ConstraintSpec spec;
    try {
        for (const auto& je : j.value("entries", nlohmann::json::array())) {
            spec.entries.push_back({parse_descriptor(je.at("f").get<std::string>()), je.at("k").get<std::size_t>(),
                                    je.value("comp", std::size_t{0}), je.at("lo").get<double>(),
                                    je.at("hi").get<double>()});
        }
        for (const auto& jr : j.value("ratios", nlohmann::json::array())) {
            spec.ratios.push_back({parse_descriptor(jr.at("f").get<std::string>()), jr.at("k").get<std::size_t>(),
                                   jr.at("l").get<std::size_t>(), jr.value("comp", std::size_t{0}),
                                   jr.at("a").get<double>(), jr.at("b").get<double>()});
        }
        if (j.contains("barrier")) {
            const auto& jb = j.at("barrier");
            spec.barrier.t0 = jb.value("t0", spec.barrier.t0);
            spec.barrier.growth = jb.value("growth", spec.barrier.growth);
            spec.barrier.t_max = jb.value("t_max", spec.barrier.t_max);
        }
        spec.allow_pair_ratios = j.value("allow_pair_ratios", false);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("constraint spec: ") + e.what());
    }
    return spec;
}

}  // namespace shapeloss
