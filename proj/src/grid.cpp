#include "shapeloss/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapeloss/errors.hpp"

namespace shapeloss {

GridShape::GridShape(std::size_t height, std::size_t width) : height_(height), width_(width) {
    if (height == 0 || width == 0) {
        throw InvalidArgument("grid shape must be at least 1x1, got " + std::to_string(height) + "x" +
                              std::to_string(width));
    }
}

ProbMap::ProbMap(GridShape shape, std::size_t num_classes, std::vector<double> values)
    : shape_(shape), num_classes_(num_classes), values_(std::move(values)) {
    if (num_classes_ < 2) throw InvalidArgument("ProbMap needs at least 2 classes");
    if (values_.size() != shape_.pixel_count() * num_classes_) {
        throw InvalidArgument("ProbMap value count does not match shape x classes");
    }
    for (std::size_t i = 0; i < shape_.pixel_count(); ++i) {
        double row = 0.0;
        for (std::size_t k = 0; k < num_classes_; ++k) {
            const double v = values_[i * num_classes_ + k];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw InvalidArgument("ProbMap value outside [0,1] at pixel " + std::to_string(i));
            }
            row += v;
        }
        if (std::abs(row - 1.0) > kSimplexTolerance) {
            throw InvalidArgument("ProbMap row does not sum to 1 at pixel " + std::to_string(i));
        }
    }
}

ProbMap ProbMap::uniform(GridShape shape, std::size_t num_classes) {
    if (num_classes == 0) throw InvalidArgument("ProbMap needs at least 2 classes");
    return ProbMap(shape, num_classes,
                   std::vector<double>(shape.pixel_count() * num_classes, 1.0 / static_cast<double>(num_classes)));
}

LogitField::LogitField(GridShape shape, std::size_t num_classes, std::vector<double> values)
    : shape_(shape), num_classes_(num_classes), values_(std::move(values)) {
    if (num_classes_ < 1) throw InvalidArgument("LogitField needs at least 1 class");
    if (values_.size() != shape_.pixel_count() * num_classes_) {
        throw InvalidArgument("LogitField value count does not match shape x classes");
    }
    for (std::size_t n = 0; n < values_.size(); ++n) {
        if (!std::isfinite(values_[n])) {
            throw InvalidArgument("non-finite logit at pixel " + std::to_string(n / num_classes_));
        }
    }
}

LogitField LogitField::zeros(GridShape shape, std::size_t num_classes) {
    return LogitField(shape, num_classes, std::vector<double>(shape.pixel_count() * num_classes, 0.0));
}

LabelMask::LabelMask(GridShape shape, std::size_t num_classes, std::vector<std::uint8_t> labels)
    : shape_(shape), num_classes_(num_classes), labels_(std::move(labels)) {
    if (num_classes_ < 1 || num_classes_ > kMaxClasses) {
        throw InvalidArgument("LabelMask class count must be in [1, 256]");
    }
    if (labels_.size() != shape_.pixel_count()) {
        throw InvalidArgument("LabelMask label count does not match shape");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= num_classes_) {
            throw InvalidArgument("label " + std::to_string(labels_[i]) + " at pixel " + std::to_string(i) +
                                  " is >= num_classes " + std::to_string(num_classes_));
        }
    }
}

std::size_t LabelMask::count(std::size_t k) const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(k)));
}

ProbMap softmax(const LogitField& logits) {
    const std::size_t K = logits.num_classes();
    const std::size_t n = logits.pixel_count();
    if (K < 2) throw InvalidArgument("softmax needs at least 2 classes");
    const auto in = logits.values();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = in.data() + i * K;
        double* dst = out.data() + i * K;
        const double m = *std::max_element(row, row + K);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            dst[k] = std::exp(row[k] - m);
            sum += dst[k];
        }
        const double inv = 1.0 / sum;
        for (std::size_t k = 0; k < K; ++k) dst[k] *= inv;
    }
    return ProbMap(logits.shape(), K, std::move(out));
}

ProbMap one_hot(const LabelMask& mask) {
    const std::size_t K = mask.num_classes();
    if (K < 2) throw InvalidArgument("one_hot needs at least 2 classes");
    std::vector<double> out(mask.pixel_count() * K, 0.0);
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) out[i * K + mask.at(i)] = 1.0;
    return ProbMap(mask.shape(), K, std::move(out));
}

LabelMask argmax_labels(const ProbMap& probs) {
    const std::size_t K = probs.num_classes();
    std::vector<std::uint8_t> labels(probs.pixel_count());
    const auto v = probs.values();
    for (std::size_t i = 0; i < probs.pixel_count(); ++i) {
        const double* row = v.data() + i * K;
        // max_element returns the first maximum, which is the lowest index on ties.
        labels[i] = static_cast<std::uint8_t>(std::max_element(row, row + K) - row);
    }
    return LabelMask(probs.shape(), std::min(K, LabelMask::kMaxClasses), std::move(labels));
}

}  // namespace shapeloss
