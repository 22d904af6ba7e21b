#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapeloss/gradients.hpp"
#include "shapeloss/grid.hpp"

namespace shapeloss {

// Something with a flat parameter vector that produces a full-image logit
// field. The whole image is always evaluated at once: descriptor losses sum
// over the full domain and cannot be split into patches.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::string name() const = 0;
    virtual GridShape shape() const = 0;
    virtual std::size_t num_classes() const = 0;

    virtual std::span<double> parameters() = 0;
    virtual std::span<const double> parameters() const = 0;

    // forward() caches whatever backward() needs.
    virtual LogitField forward() = 0;
    // Writes dLoss/dparams for the most recent forward().
    virtual void backward(const GradField& grad_logits, std::span<double> grad_params) = 0;
};

// The logit field itself is the parameter vector, initialized to zero
// (uniform softmax, mass |Omega| / K per class).
class FreeField final : public Predictor {
public:
    FreeField(GridShape shape, std::size_t num_classes);

    std::string name() const override { return "freefield"; }
    GridShape shape() const override { return shape_; }
    std::size_t num_classes() const override { return num_classes_; }
    std::span<double> parameters() override { return params_; }
    std::span<const double> parameters() const override { return params_; }

    LogitField forward() override;
    void backward(const GradField& grad_logits, std::span<double> grad_params) override;

private:
    GridShape shape_;
    std::size_t num_classes_;
    std::vector<double> params_;
};

// Two tanh hidden layers mapping (x / H, y / W, intensity) to K logits.
// Weights and biases start uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
class CoordNet final : public Predictor {
public:
    CoordNet(GridShape shape, std::size_t num_classes, std::optional<GrayImage> intensity, std::size_t hidden,
             std::uint64_t seed);

    std::string name() const override { return "coordnet"; }
    GridShape shape() const override { return shape_; }
    std::size_t num_classes() const override { return num_classes_; }
    std::span<double> parameters() override { return params_; }
    std::span<const double> parameters() const override { return params_; }

    std::size_t hidden() const noexcept { return hidden_; }

    LogitField forward() override;
    void backward(const GradField& grad_logits, std::span<double> grad_params) override;

private:
    GridShape shape_;
    std::size_t num_classes_;
    std::size_t hidden_;
    std::vector<double> inputs_;  // |Omega| x 3, row-major
    std::vector<double> params_;
    std::vector<double> h1_, h2_;  // activations from the last forward
};

enum class PredictorKind { FreeField, CoordNet };

PredictorKind parse_predictor_kind(const std::string& name);

std::unique_ptr<Predictor> make_predictor(PredictorKind kind, GridShape shape, std::size_t num_classes,
                                          std::optional<GrayImage> intensity, std::uint64_t seed,
                                          std::size_t hidden = 64);

}  // namespace shapeloss
