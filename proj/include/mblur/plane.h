#pragma once

#include <cassert>
#include <vector>

namespace mblur {

/// Row-major 2D buffer of per-pixel values. All G-buffer, mask, and image
/// planes are instances of this.
template <typename T>
class Plane {
  public:
    Plane() = default;
    Plane(int width, int height, const T& init = T{})
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height, init) {}

    int width() const { return width_; }
    int height() const { return height_; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    T& at(int x, int y) {
        assert(in_bounds(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }
    const T& at(int x, int y) const {
        assert(in_bounds(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }

    // edge-clamped access
    const T& at_clamped(int x, int y) const {
        x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
        y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
        return data_[static_cast<size_t>(y) * width_ + x];
    }

    void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    bool operator==(const Plane& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

}  // namespace mblur
