#pragma once

#include "mblur/plane.h"
#include "mblur/raymask.h"
#include "mblur/scene.h"
#include "mblur/vec.h"

namespace mblur {

/// Per-tile dominant velocity, then the same after a 3x3 dilation. Pixels
/// index their tile with integer division by tile_size.
struct TileMap {
    int tiles_x = 0;
    int tiles_y = 0;
    int tile_size = 1;
    Plane<Vec2> v;

    TileMap() = default;
    TileMap(int tx, int ty, int k) : tiles_x(tx), tiles_y(ty), tile_size(k), v(tx, ty, Vec2{0, 0}) {}

    const Vec2& at_pixel(int px, int py) const { return v.at(px / tile_size, py / tile_size); }
};

/// Velocity of maximal magnitude in each tile_size x tile_size tile; ties
/// keep the first pixel in scan order.
TileMap tile_max(const Plane<Vec2>& velocity, int tile_size);

/// Velocity of maximal magnitude over each tile's 3x3 neighborhood,
/// edge-clamped; ties keep the first tile in scan order.
TileMap neighbor_max(const TileMap& tiles);

/// Output of the gather filter: blurred color plus the weight fraction that
/// came from the pixel's own surface id (the coverage used to composite).
struct BlurLayer {
    int width = 0;
    int height = 0;
    Plane<Vec3> color;
    Plane<double> alpha;

    BlurLayer() = default;
    BlurLayer(int w, int h) : width(w), height(h), color(w, h, Vec3{0, 0, 0}), alpha(w, h, 1.0) {}
};

/// Motion-blur gather along the dilated dominant velocity. The sampling
/// range runs from the pixel forward one full velocity, so the pixel sits at
/// an end of the range rather than its center; sample times are jittered by
/// a hash of the pixel coordinates, making renders byte-identical.
///
/// mesh_id supplies the per-sample surface id and fg_id the reference id at
/// the filtered pixel; alpha is the weight fraction whose sample id matches
/// the reference.
BlurLayer blur_filter(const Plane<Vec3>& color, const Plane<double>& depth,
                      const Plane<Vec2>& velocity, const Plane<int>& mesh_id,
                      const Plane<int>& fg_id, const TileMap& nmax, const RenderConfig& cfg,
                      int workers = 1);

/// Coverage blend at masked pixels, raster blur everywhere else. Alpha comes
/// from the raster layer.
Plane<Vec3> composite(const BlurLayer& raster_blur, const BlurLayer& bg_blur, const BitMask& mask);

}  // namespace mblur
