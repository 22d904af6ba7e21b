#pragma once

// Spatial domain, probability maps and label masks.
//
// Coordinate convention used everywhere in the engine: x is the zero-based
// ROW index and y is the zero-based COLUMN index. Pixels are flattened
// row-major, so pixel i sits at (x, y) = (i / width, i % width). Per-class
// tensors are pixel-major: values[i * K + k].

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shapeloss {

class GridShape {
public:
    GridShape(std::size_t height, std::size_t width);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }

    bool operator==(const GridShape&) const = default;

private:
    std::size_t height_;
    std::size_t width_;
};

struct PixelCoord {
    std::size_t x;  // row
    std::size_t y;  // column

    bool operator==(const PixelCoord&) const = default;
};

inline PixelCoord coord_of(const GridShape& shape, std::size_t pixel) noexcept {
    return {pixel / shape.width(), pixel % shape.width()};
}

inline std::size_t index_of(const GridShape& shape, PixelCoord c) noexcept {
    return c.x * shape.width() + c.y;
}

// Per-pixel class probabilities. Every row lies on the simplex.
class ProbMap {
public:
    static constexpr double kSimplexTolerance = 1e-6;

    ProbMap(GridShape shape, std::size_t num_classes, std::vector<double> values);

    const GridShape& shape() const noexcept { return shape_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t pixel_count() const noexcept { return shape_.pixel_count(); }

    double at(std::size_t pixel, std::size_t k) const noexcept { return values_[pixel * num_classes_ + k]; }
    std::span<const double> values() const noexcept { return values_; }

    // Uniform 1/K everywhere.
    static ProbMap uniform(GridShape shape, std::size_t num_classes);

private:
    GridShape shape_;
    std::size_t num_classes_;
    std::vector<double> values_;
};

// Unconstrained pre-softmax scores; finite only.
class LogitField {
public:
    LogitField(GridShape shape, std::size_t num_classes, std::vector<double> values);

    const GridShape& shape() const noexcept { return shape_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t pixel_count() const noexcept { return shape_.pixel_count(); }

    double at(std::size_t pixel, std::size_t k) const noexcept { return values_[pixel * num_classes_ + k]; }
    std::span<const double> values() const noexcept { return values_; }

    static LogitField zeros(GridShape shape, std::size_t num_classes);

private:
    GridShape shape_;
    std::size_t num_classes_;
    std::vector<double> values_;
};

// Hard class assignment per pixel. At most 256 classes so a label fits a PGM byte.
class LabelMask {
public:
    static constexpr std::size_t kMaxClasses = 256;

    LabelMask(GridShape shape, std::size_t num_classes, std::vector<std::uint8_t> labels);

    const GridShape& shape() const noexcept { return shape_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t pixel_count() const noexcept { return shape_.pixel_count(); }

    std::uint8_t at(std::size_t pixel) const noexcept { return labels_[pixel]; }
    std::uint8_t at(PixelCoord c) const noexcept { return labels_[index_of(shape_, c)]; }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }

    std::size_t count(std::size_t k) const noexcept;

    bool operator==(const LabelMask&) const = default;

private:
    GridShape shape_;
    std::size_t num_classes_;
    std::vector<std::uint8_t> labels_;
};

// Grayscale intensity field with values in [0, 1].
struct GrayImage {
    GridShape shape;
    std::vector<double> values;

    double at(std::size_t pixel) const noexcept { return values[pixel]; }
};

// Max-subtracted softmax. Throws InvalidArgument on non-finite logits.
ProbMap softmax(const LogitField& logits);

ProbMap one_hot(const LabelMask& mask);

// Ties resolve to the lowest class index.
LabelMask argmax_labels(const ProbMap& probs);

}  // namespace shapeloss
