#include "shapeloss/predictor.hpp"

#include <Eigen/Core>
#include <cmath>
#include <random>

#include "shapeloss/errors.hpp"

namespace shapeloss {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::RowVectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::RowVectorXd>;

constexpr std::size_t kInputs = 3;

// Offsets of each tensor inside the flat parameter vector.
struct Layout {
    std::size_t hidden, classes;
    std::size_t w1, b1, w2, b2, w3, b3, total;

    Layout(std::size_t h, std::size_t k) : hidden(h), classes(k) {
        w1 = 0;
        b1 = w1 + kInputs * h;
        w2 = b1 + h;
        b2 = w2 + h * h;
        w3 = b2 + h;
        b3 = w3 + h * k;
        total = b3 + k;
    }
};

}  // namespace

FreeField::FreeField(GridShape shape, std::size_t num_classes)
    : shape_(shape), num_classes_(num_classes), params_(shape.pixel_count() * num_classes, 0.0) {
    if (num_classes < 2) throw InvalidArgument("predictor needs at least 2 classes");
}

LogitField FreeField::forward() { return LogitField(shape_, num_classes_, params_); }

void FreeField::backward(const GradField& grad_logits, std::span<double> grad_params) {
    if (grad_params.size() != params_.size() || grad_logits.values.size() != params_.size()) {
        throw InvalidArgument("FreeField::backward: size mismatch");
    }
    std::copy(grad_logits.values.begin(), grad_logits.values.end(), grad_params.begin());
}

CoordNet::CoordNet(GridShape shape, std::size_t num_classes, std::optional<GrayImage> intensity, std::size_t hidden,
                   std::uint64_t seed)
    : shape_(shape), num_classes_(num_classes), hidden_(hidden) {
    if (num_classes < 2) throw InvalidArgument("predictor needs at least 2 classes");
    if (hidden == 0) throw InvalidArgument("CoordNet hidden width must be positive");
    if (intensity && !(intensity->shape == shape)) throw InvalidArgument("CoordNet intensity image has wrong shape");

    const std::size_t n = shape.pixel_count();
    inputs_.resize(n * kInputs);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = coord_of(shape, i);
        inputs_[i * kInputs + 0] = static_cast<double>(c.x) / static_cast<double>(shape.height());
        inputs_[i * kInputs + 1] = static_cast<double>(c.y) / static_cast<double>(shape.width());
        inputs_[i * kInputs + 2] = intensity ? intensity->at(i) : 0.0;
    }

    const Layout L(hidden, num_classes);
    params_.resize(L.total);
    std::mt19937_64 rng(seed);
    auto fill = [&](std::size_t from, std::size_t count, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (std::size_t n2 = 0; n2 < count; ++n2) params_[from + n2] = dist(rng);
    };
    fill(L.w1, kInputs * hidden, kInputs);
    fill(L.b1, hidden, kInputs);
    fill(L.w2, hidden * hidden, hidden);
    fill(L.b2, hidden, hidden);
    fill(L.w3, hidden * num_classes, hidden);
    fill(L.b3, num_classes, hidden);
}

LogitField CoordNet::forward() {
    const Layout L(hidden_, num_classes_);
    const auto n = static_cast<Eigen::Index>(shape_.pixel_count());
    const auto H = static_cast<Eigen::Index>(hidden_);
    const auto K = static_cast<Eigen::Index>(num_classes_);
    const double* p = params_.data();

    ConstMatMap X(inputs_.data(), n, kInputs);
    ConstMatMap W1(p + L.w1, kInputs, H);
    ConstVecMap b1(p + L.b1, H);
    ConstMatMap W2(p + L.w2, H, H);
    ConstVecMap b2(p + L.b2, H);
    ConstMatMap W3(p + L.w3, H, K);
    ConstVecMap b3(p + L.b3, K);

    h1_.resize(static_cast<std::size_t>(n * H));
    h2_.resize(static_cast<std::size_t>(n * H));
    MatMap H1(h1_.data(), n, H);
    MatMap H2(h2_.data(), n, H);
    H1.noalias() = X * W1;
    H1.rowwise() += b1;
    H1 = H1.array().tanh().matrix();
    H2.noalias() = H1 * W2;
    H2.rowwise() += b2;
    H2 = H2.array().tanh().matrix();

    std::vector<double> logits(static_cast<std::size_t>(n * K));
    MatMap Z(logits.data(), n, K);
    Z.noalias() = H2 * W3;
    Z.rowwise() += b3;
    return LogitField(shape_, num_classes_, std::move(logits));
}

void CoordNet::backward(const GradField& grad_logits, std::span<double> grad_params) {
    const Layout L(hidden_, num_classes_);
    if (grad_params.size() != L.total) throw InvalidArgument("CoordNet::backward: parameter size mismatch");
    if (h1_.empty()) throw InvalidArgument("CoordNet::backward called before forward");
    const auto n = static_cast<Eigen::Index>(shape_.pixel_count());
    const auto H = static_cast<Eigen::Index>(hidden_);
    const auto K = static_cast<Eigen::Index>(num_classes_);
    if (grad_logits.values.size() != static_cast<std::size_t>(n * K)) {
        throw InvalidArgument("CoordNet::backward: logit gradient size mismatch");
    }
    const double* p = params_.data();
    double* g = grad_params.data();

    ConstMatMap X(inputs_.data(), n, kInputs);
    ConstMatMap W2(p + L.w2, H, H);
    ConstMatMap W3(p + L.w3, H, K);
    ConstMatMap H1(h1_.data(), n, H);
    ConstMatMap H2(h2_.data(), n, H);
    ConstMatMap G(grad_logits.values.data(), n, K);

    MatMap dW1(g + L.w1, kInputs, H);
    VecMap db1(g + L.b1, H);
    MatMap dW2(g + L.w2, H, H);
    VecMap db2(g + L.b2, H);
    MatMap dW3(g + L.w3, H, K);
    VecMap db3(g + L.b3, K);

    dW3.noalias() = H2.transpose() * G;
    db3 = G.colwise().sum();
    RowMat dA2 = ((G * W3.transpose()).array() * (1.0 - H2.array().square())).matrix();
    dW2.noalias() = H1.transpose() * dA2;
    db2 = dA2.colwise().sum();
    RowMat dA1 = ((dA2 * W2.transpose()).array() * (1.0 - H1.array().square())).matrix();
    dW1.noalias() = X.transpose() * dA1;
    db1 = dA1.colwise().sum();
}

PredictorKind parse_predictor_kind(const std::string& name) {
    if (name == "freefield") return PredictorKind::FreeField;
    if (name == "coordnet") return PredictorKind::CoordNet;
    throw InvalidArgument("unknown predictor '" + name + "' (expected freefield or coordnet)");
}

std::unique_ptr<Predictor> make_predictor(PredictorKind kind, GridShape shape, std::size_t num_classes,
                                          std::optional<GrayImage> intensity, std::uint64_t seed,
                                          std::size_t hidden) {
    if (kind == PredictorKind::FreeField) return std::make_unique<FreeField>(shape, num_classes);
    return std::make_unique<CoordNet>(shape, num_classes, std::move(intensity), hidden, seed);
}

}  // namespace shapeloss
