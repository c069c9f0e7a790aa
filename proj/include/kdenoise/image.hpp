#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kdenoise/core.hpp"

namespace kdn {

// Row-major grayscale pixel grid over the physical rectangle [0,l] x [0,w].
// Pixel (i,j) sits at the center of its cell, so the lattice never touches
// the domain boundary. Clean images take values in [0,1]; noisy images are
// stored unclipped.
class GrayscaleImage {
public:
    GrayscaleImage(int rows, int cols, double length, double width)
        : GrayscaleImage(rows, cols, length, width,
                         std::vector<double>(static_cast<std::size_t>(rows > 0 ? rows : 0) *
                                                 static_cast<std::size_t>(cols > 0 ? cols : 0),
                                             0.0)) {}

    GrayscaleImage(int rows, int cols, double length, double width, std::vector<double> values)
        : rows_(rows), cols_(cols), length_(length), width_(width), values_(std::move(values)) {
        if (rows_ < 1 || cols_ < 1)
            throw std::invalid_argument("GrayscaleImage: pixel counts must be positive");
        if (!(length_ > 0.0) || !(width_ > 0.0))
            throw std::invalid_argument("GrayscaleImage: physical dimensions must be positive");
        if (values_.size() != pixel_count())
            throw std::invalid_argument("GrayscaleImage: value buffer does not match dimensions");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double length() const { return length_; }
    double width() const { return width_; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
    }

    // Pixel spacing along each axis.
    double dx() const { return length_ / cols_; }
    double dy() const { return width_ / rows_; }
    // Conservative single spacing for bandwidth selection on anisotropic grids.
    double pixel_spacing() const { return std::max(dx(), dy()); }

    double& at(int i, int j) { return values_[index(i, j)]; }
    double at(int i, int j) const { return values_[index(i, j)]; }
    double operator()(int i, int j) const { return values_[index(i, j)]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    Point2 pixel_center(int i, int j) const {
        return Point2{(j + 0.5) * dx(), (i + 0.5) * dy()};
    }

    // All pixel centers in row-major order; this fixes the sample ordering
    // used by every kernel matrix.
    std::vector<Point2> pixel_centers() const {
        std::vector<Point2> pts;
        pts.reserve(pixel_count());
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                pts.push_back(pixel_center(i, j));
        return pts;
    }

    bool same_shape(const GrayscaleImage& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(j);
    }

    int rows_;
    int cols_;
    double length_;
    double width_;
    std::vector<double> values_;
};

// Test pattern value at a physical location: 0.5 * (1 + cos(a x1) cos(a x2)).
inline double cosine_field(double x1, double x2, double alpha) {
    return 0.5 * (1.0 + std::cos(alpha * x1) * std::cos(alpha * x2));
}

// Synthetic separable-cosine image sampled at pixel centers.
inline GrayscaleImage synth_cosine(int rows, int cols, double length, double width, double alpha) {
    GrayscaleImage img(rows, cols, length, width);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const Point2 p = img.pixel_center(i, j);
            img.at(i, j) = cosine_field(p.x, p.y, alpha);
        }
    }
    return img;
}

inline void require_same_shape(const GrayscaleImage& a, const GrayscaleImage& b, const char* who) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(who) + ": image dimensions differ");
}

// Root mean square pixel difference.
inline double l2_error(const GrayscaleImage& a, const GrayscaleImage& b) {
    require_same_shape(a, b, "l2_error");
    double acc = 0.0;
    const std::size_t n = a.pixel_count();
    for (std::size_t k = 0; k < n; ++k) {
        const double d = a.values()[k] - b.values()[k];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

// Maximum absolute pixel difference.
inline double sup_error(const GrayscaleImage& a, const GrayscaleImage& b) {
    require_same_shape(a, b, "sup_error");
    double m = 0.0;
    const std::size_t n = a.pixel_count();
    for (std::size_t k = 0; k < n; ++k)
        m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

} // namespace kdn
