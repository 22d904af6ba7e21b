#pragma once

// Reverse-mode derivatives through the fixed graph
//   logits -> softmax -> moments -> descriptors -> barrier terms -> sum.
//
// Adjoints of a class-k descriptor w.r.t. s(i,k), with m = mass and
// (cx, cy) the centroid:
//   volume    1
//   centroid  (x_i - cx) / m
//   spread    ((x_i - cx)^2 - Dx^2) / (2 Dx m)
//   length    sum over neighbors j of sign(s_i - s_j)   (sign(0) := 0),
//             or (s_i - s_j) / sqrt((s_i - s_j)^2 + delta) in smooth mode.

#include <span>
#include <vector>

#include "shapeloss/constraints.hpp"
#include "shapeloss/descriptors.hpp"
#include "shapeloss/grid.hpp"

namespace shapeloss {

// Radicand floor for the spread adjoint.
inline constexpr double kSpreadRadicandFloor = 1e-12;

// dLoss/dlogit, pixel-major like the logits.
struct GradField {
    GridShape shape;
    std::size_t num_classes;
    std::vector<double> values;
};

// Accumulates upstream * d f(k) / d probs into grad (size |Omega| * K).
// upstream[1] is used only by pair-valued descriptors. Throws
// DegenerateClassError for centroid/spread of a class with mass <= kMassEpsilon.
void accumulate_descriptor_vjp(const ProbMap& probs, std::size_t k, Descriptor f, const LaplacianCache& lap,
                               Vec2 upstream, std::span<double> grad, AbsOptions abs = {});

std::vector<double> descriptor_vjp(const ProbMap& probs, std::size_t k, Descriptor f, const LaplacianCache& lap,
                                   Vec2 upstream, AbsOptions abs = {});

// Chains dLoss/dprobs through the softmax Jacobian:
//   g_z(i,k) = s(i,k) * (g_s(i,k) - sum_l s(i,l) g_s(i,l)).
GradField softmax_backward(const ProbMap& probs, std::span<const double> grad_probs);

struct LossOptions {
    AbsOptions abs;
    DegeneracyPolicy degeneracy;
};

struct ProbLossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // dLoss/dprobs
    DescriptorSet values;      // descriptors at probs, under opts.abs
};

ProbLossGrad loss_grad_probs(const ProbMap& probs, const ConstraintSpec& spec, double t, const LaplacianCache& lap,
                             const LossOptions& opts = {});

struct LossGrad {
    double loss = 0.0;
    GradField grad;
    ProbMap probs;
    DescriptorSet values;
};

// Barrier loss of every active entry at barrier slope t, and its exact
// gradient w.r.t. logits. Throws NumericalError naming the constraint when any
// intermediate is non-finite.
LossGrad loss_grad(const LogitField& logits, const ConstraintSpec& spec, double t, const LaplacianCache& lap,
                   const LossOptions& opts = {});

}  // namespace shapeloss
