#include "shapeloss/gradients.hpp"

#include <algorithm>
#include <cmath>

#include "shapeloss/errors.hpp"

namespace shapeloss {

namespace {

// Upstream values per class for each descriptor component.
struct ClassAdjoint {
    double volume = 0.0;
    Vec2 centroid{0.0, 0.0};
    Vec2 spread{0.0, 0.0};
    double length = 0.0;

    bool needs_moments() const noexcept {
        return centroid[0] != 0.0 || centroid[1] != 0.0 || spread[0] != 0.0 || spread[1] != 0.0;
    }
};

void apply_adjoints(const ProbMap& probs, std::span<const ClassMoments> moments, std::span<const ClassAdjoint> adj,
                    const LaplacianCache& lap, const AbsOptions& abs, std::span<double> grad) {
    const std::size_t K = probs.num_classes();
    const std::size_t W = probs.shape().width();
    const std::size_t n = probs.pixel_count();
    if (grad.size() != n * K) throw InvalidArgument("gradient buffer has wrong size");
    if (!(lap.shape() == probs.shape())) throw InvalidArgument("Laplacian shape does not match ProbMap shape");

    // Per-class affine/quadratic coefficients in (x, y).
    struct Coef {
        double c0 = 0.0, ax = 0.0, ay = 0.0, qx = 0.0, qy = 0.0, cx = 0.0, cy = 0.0, vx = 0.0, vy = 0.0;
    };
    std::vector<Coef> coef(K);
    bool any_pixel_term = false;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& a = adj[k];
        auto& c = coef[k];
        c.c0 = a.volume;
        if (a.volume != 0.0) any_pixel_term = true;
        if (!a.needs_moments()) continue;
        const double m = moments[k].m00;
        if (!(m > kMassEpsilon)) {
            throw DegenerateClassError(k, m, "centroid/spread gradient undefined for class " + std::to_string(k));
        }
        any_pixel_term = true;
        const Vec2 center = moments[k].center();
        c.cx = center[0];
        c.cy = center[1];
        c.vx = moments[k].c20 / m;
        c.vy = moments[k].c02 / m;
        c.ax = a.centroid[0] / m;
        c.ay = a.centroid[1] / m;
        c.qx = a.spread[0] / (2.0 * std::sqrt(std::max(c.vx, kSpreadRadicandFloor)) * m);
        c.qy = a.spread[1] / (2.0 * std::sqrt(std::max(c.vy, kSpreadRadicandFloor)) * m);
    }

    if (any_pixel_term) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = static_cast<double>(i / W);
            const double y = static_cast<double>(i % W);
            double* g = grad.data() + i * K;
            for (std::size_t k = 0; k < K; ++k) {
                const auto& c = coef[k];
                const double dx = x - c.cx;
                const double dy = y - c.cy;
                g[k] += c.c0 + c.ax * dx + c.ay * dy + c.qx * (dx * dx - c.vx) + c.qy * (dy * dy - c.vy);
            }
        }
    }

    std::vector<std::size_t> length_classes;
    for (std::size_t k = 0; k < K; ++k) {
        if (adj[k].length != 0.0) length_classes.push_back(k);
    }
    if (length_classes.empty()) return;
    const auto v = probs.values();
    for (const auto& e : lap.edges()) {
        const std::size_t bi = static_cast<std::size_t>(e.i) * K;
        const std::size_t bj = static_cast<std::size_t>(e.j) * K;
        for (std::size_t k : length_classes) {
            const double d = v[bi + k] - v[bj + k];
            double w;
            if (abs.mode == AbsMode::Exact) {
                w = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            } else {
                w = d / std::sqrt(d * d + abs.delta);
            }
            grad[bi + k] += adj[k].length * w;
            grad[bj + k] -= adj[k].length * w;
        }
    }
}

ClassAdjoint& adjoint_for(std::vector<ClassAdjoint>& adj, std::size_t k) { return adj.at(k); }

void add_upstream(ClassAdjoint& a, Descriptor f, std::size_t comp, double up) {
    switch (f) {
        case Descriptor::Volume: a.volume += up; break;
        case Descriptor::Centroid: a.centroid[comp] += up; break;
        case Descriptor::Spread: a.spread[comp] += up; break;
        case Descriptor::Length: a.length += up; break;
    }
}

void require_finite(double value, const std::string& what) {
    if (!std::isfinite(value)) throw NumericalError("non-finite value in " + what);
}

}  // namespace

void accumulate_descriptor_vjp(const ProbMap& probs, std::size_t k, Descriptor f, const LaplacianCache& lap,
                               Vec2 upstream, std::span<double> grad, AbsOptions abs) {
    if (k >= probs.num_classes()) throw InvalidArgument("class out of range");
    std::vector<ClassAdjoint> adj(probs.num_classes());
    add_upstream(adj[k], f, 0, upstream[0]);
    if (is_pair_valued(f)) add_upstream(adj[k], f, 1, upstream[1]);
    std::vector<ClassMoments> moments;
    if (adj[k].needs_moments()) {
        moments = class_moments(probs);
    } else {
        moments.resize(probs.num_classes());
    }
    apply_adjoints(probs, moments, adj, lap, abs, grad);
}

std::vector<double> descriptor_vjp(const ProbMap& probs, std::size_t k, Descriptor f, const LaplacianCache& lap,
                                   Vec2 upstream, AbsOptions abs) {
    std::vector<double> grad(probs.values().size(), 0.0);
    accumulate_descriptor_vjp(probs, k, f, lap, upstream, grad, abs);
    return grad;
}

GradField softmax_backward(const ProbMap& probs, std::span<const double> grad_probs) {
    const std::size_t K = probs.num_classes();
    const auto s = probs.values();
    if (grad_probs.size() != s.size()) throw InvalidArgument("gradient size does not match ProbMap");
    GradField out{probs.shape(), K, std::vector<double>(s.size())};
    for (std::size_t i = 0; i < probs.pixel_count(); ++i) {
        const double* si = s.data() + i * K;
        const double* gi = grad_probs.data() + i * K;
        double dot = 0.0;
        for (std::size_t k = 0; k < K; ++k) dot += si[k] * gi[k];
        double* dst = out.values.data() + i * K;
        for (std::size_t k = 0; k < K; ++k) dst[k] = si[k] * (gi[k] - dot);
    }
    return out;
}

ProbLossGrad loss_grad_probs(const ProbMap& probs, const ConstraintSpec& spec, double t, const LaplacianCache& lap,
                             const LossOptions& opts) {
    if (!(t > 0.0)) throw InvalidArgument("barrier slope t must be > 0");
    spec.validate(probs.num_classes());
    const auto canon = spec.canonical();
    ProbLossGrad out;
    out.grad.assign(probs.values().size(), 0.0);
    if (canon.empty()) {
        out.values = describe(probs, lap, {}, opts.abs);
        return out;
    }

    const auto requests = canon.ratio_requests();
    const auto moments = class_moments(probs);
    const auto lengths = class_lengths(probs, lap, opts.abs);
    DescriptorSet& values = out.values;
    values.classes.resize(probs.num_classes());
    for (std::size_t k = 0; k < probs.num_classes(); ++k) values.classes[k] = class_descriptors(moments[k], lengths[k]);
    for (const auto& r : requests) {
        RatioValue rv{r, std::nullopt};
        const auto num = descriptor_value(values.classes[r.k], r.f, r.component);
        const auto den = descriptor_value(values.classes[r.l], r.f, r.component);
        if (num && den && std::abs(*den) > kMassEpsilon) rv.value = *num / *den;
        values.ratios.push_back(rv);
    }

    std::vector<ClassAdjoint> adj(probs.num_classes());
    double loss = 0.0;
    for (const auto& e : canon.entries) {
        if (!entry_active(e, values, opts.degeneracy)) continue;
        const auto label = entry_label(e);
        const auto v = descriptor_value(values.classes[e.k], e.f, e.comp);
        if (!v) throw DegenerateClassError(e.k, values.classes[e.k].volume, label + ": class is degenerate");
        require_finite(*v, label);
        const double term = barrier(e.lo - *v, t) + barrier(*v - e.hi, t);
        const double dterm = -barrier_grad(e.lo - *v, t) + barrier_grad(*v - e.hi, t);
        require_finite(term, label);
        require_finite(dterm, label);
        loss += term;
        add_upstream(adjoint_for(adj, e.k), e.f, e.comp, dterm);
    }
    for (const auto& r : canon.ratios) {
        if (!ratio_active(r, values, opts.degeneracy)) continue;
        const auto label = ratio_label(r);
        const auto num = descriptor_value(values.classes[r.k], r.f, r.comp);
        const auto den = descriptor_value(values.classes[r.l], r.f, r.comp);
        if (!num || !den || !(std::abs(*den) > kMassEpsilon)) {
            throw DegenerateClassError(r.l, values.classes[r.l].volume, label + ": degenerate ratio");
        }
        const double q = *num / *den;
        const double term = barrier(r.a - q, t) + barrier(q - r.b, t);
        const double dq = -barrier_grad(r.a - q, t) + barrier_grad(q - r.b, t);
        require_finite(q, label);
        require_finite(term, label);
        loss += term;
        add_upstream(adjoint_for(adj, r.k), r.f, r.comp, dq / *den);
        add_upstream(adjoint_for(adj, r.l), r.f, r.comp, -dq * *num / (*den * *den));
    }
    out.loss = loss;
    apply_adjoints(probs, moments, adj, lap, opts.abs, out.grad);
    for (double g : out.grad) require_finite(g, "loss gradient");
    return out;
}

LossGrad loss_grad(const LogitField& logits, const ConstraintSpec& spec, double t, const LaplacianCache& lap,
                   const LossOptions& opts) {
    auto probs = softmax(logits);
    auto pg = loss_grad_probs(probs, spec, t, lap, opts);
    auto grad = softmax_backward(probs, pg.grad);
    return {pg.loss, std::move(grad), std::move(probs), std::move(pg.values)};
}

}  // namespace shapeloss
