#pragma once

#include <cstdint>
#include <vector>

#include "mblur/gbuffer.h"

namespace mblur {

/// Boolean pixel mask with a maintained set-bit count.
class BitMask {
  public:
    BitMask() = default;
    BitMask(int width, int height) : width_(width), height_(height),
        bits_(static_cast<size_t>(width) * height, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    int count() const { return count_; }

    bool get(int x, int y) const { return bits_[static_cast<size_t>(y) * width_ + x] != 0; }

    void set(int x, int y, bool v) {
        uint8_t& b = bits_[static_cast<size_t>(y) * width_ + x];
        count_ += static_cast<int>(v) - static_cast<int>(b != 0);
        b = v ? 1 : 0;
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    const std::vector<uint8_t>& bits() const { return bits_; }

    bool operator==(const BitMask& o) const {
        return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
    }

  private:
    int width_ = 0;
    int height_ = 0;
    int count_ = 0;
    std::vector<uint8_t> bits_;
};

/// Displacement test: marks pixels whose forward-displaced position lands on
/// a different mesh sufficiently deeper than the pixel itself.
BitMask candidate_mask(const GBuffer& g, const RenderConfig& cfg);

/// Sobel edge response over normalized depth and the normal channels,
/// evaluated at candidate pixels and cut at sobel_threshold.
BitMask edge_mask(const GBuffer& g, const BitMask& candidates, const RenderConfig& cfg);

/// Spreads the edge mask back along each moving pixel's displacement: a
/// pixel passes if any sample on its path is an edge.
BitMask range_check(const BitMask& edges, const GBuffer& g, const RenderConfig& cfg);

/// Full three-stage ray mask.
BitMask build_ray_mask(const GBuffer& g, const RenderConfig& cfg);

}  // namespace mblur
