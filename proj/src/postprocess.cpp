#include "mblur/postprocess.h"

#include <cassert>
#include <cmath>

#include "mblur/parallel.h"

namespace mblur {

namespace {

// Difference that stays meaningful when both depths are the +inf background
// sentinel: equal infinities compare as equal depth instead of NaN.
double depth_diff(double a, double b) {
    if (std::isinf(a) && std::isinf(b) && a == b) return 0.0;
    return a - b;
}

double cone(double d, double speed, double min_speed) {
    return clamp01(1.0 - d / std::max(speed, min_speed));
}

double cylinder(double d, double speed) {
    return 1.0 - smoothstep(0.95 * speed, 1.05 * speed, d);
}

}  // namespace

TileMap tile_max(const Plane<Vec2>& velocity, int tile_size) {
    assert(tile_size >= 1);
    const int tx = (velocity.width() + tile_size - 1) / tile_size;
    const int ty = (velocity.height() + tile_size - 1) / tile_size;
    TileMap tiles(tx, ty, tile_size);

    for (int j = 0; j < ty; ++j) {
        for (int i = 0; i < tx; ++i) {
            Vec2 best{0, 0};
            double best_sq = -1.0;
            const int y1 = std::min(velocity.height(), (j + 1) * tile_size);
            const int x1 = std::min(velocity.width(), (i + 1) * tile_size);
            for (int y = j * tile_size; y < y1; ++y) {
                for (int x = i * tile_size; x < x1; ++x) {
                    const Vec2& v = velocity.at(x, y);
                    const double sq = v.length_sq();
                    if (sq > best_sq) {
                        best_sq = sq;
                        best = v;
                    }
                }
            }
            tiles.v.at(i, j) = best;
        }
    }
    return tiles;
}

TileMap neighbor_max(const TileMap& tiles) {
    TileMap out(tiles.tiles_x, tiles.tiles_y, tiles.tile_size);
    for (int j = 0; j < tiles.tiles_y; ++j) {
        for (int i = 0; i < tiles.tiles_x; ++i) {
            Vec2 best{0, 0};
            double best_sq = -1.0;
            for (int dj = -1; dj <= 1; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    const Vec2& v = tiles.v.at_clamped(i + di, j + dj);
                    const double sq = v.length_sq();
                    if (sq > best_sq) {
                        best_sq = sq;
                        best = v;
                    }
                }
            }
            out.v.at(i, j) = best;
        }
    }
    return out;
}

BlurLayer blur_filter(const Plane<Vec3>& color, const Plane<double>& depth,
                      const Plane<Vec2>& velocity, const Plane<int>& mesh_id,
                      const Plane<int>& fg_id, const TileMap& nmax, const RenderConfig& cfg,
                      int workers) {
    const int w = color.width();
    const int h = color.height();
    BlurLayer out(w, h);

    parallel_rows(h, workers, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const Vec2& vn = nmax.at_pixel(x, y);
            if (vn.length() < cfg.min_speed) {
                out.color.at(x, y) = color.at(x, y);
                out.alpha.at(x, y) = 1.0;
                continue;
            }

            const double dp = depth.at(x, y);
            const Vec2& vp = velocity.at(x, y);
            const double vp_len = std::max(vp.length(), cfg.min_speed);
            const int ref = fg_id.at(x, y);

            // The pixel's own sample: heavy when the pixel is slow so sharp
            // surfaces keep their color, light when it is fast.
            const double w0 =
                static_cast<double>(cfg.sample_count) / (cfg.tile_size * vp_len);
            double sum_w = w0;
            Vec3 sum_c = color.at(x, y) * w0;
            double sum_ref = mesh_id.at(x, y) == ref ? w0 : 0.0;

            const double jitter = hash_unit(x, y);
            for (int i = 1; i <= cfg.sample_count; ++i) {
                const double t = (i - jitter) / cfg.sample_count;
                const int sx = static_cast<int>(std::lround(x + t * vn.x));
                const int sy = static_cast<int>(std::lround(y + t * vn.y));
                if (!color.in_bounds(sx, sy)) continue;

                const double d = std::sqrt(double(sx - x) * (sx - x) + double(sy - y) * (sy - y));
                const double ds = depth.at(sx, sy);
                const Vec2& vs = velocity.at(sx, sy);
                const double vs_len = vs.length();

                // Soft depth classification: front -> the sample's own blur
                // smears it over this pixel; behind -> this pixel's blur lets
                // the sample show through from the background.
                const double front = clamp01(1.0 - depth_diff(ds, dp) / cfg.z_extent);
                const double behind = clamp01(1.0 - depth_diff(dp, ds) / cfg.z_extent);
                const double wi = front * cone(d, vs_len, cfg.min_speed) +
                                  behind * cone(d, vp.length(), cfg.min_speed) +
                                  2.0 * cylinder(d, vs_len) * cylinder(d, vp.length());
                if (wi <= 0.0) continue;

                sum_w += wi;
                sum_c = sum_c + color.at(sx, sy) * wi;
                if (mesh_id.at(sx, sy) == ref) sum_ref += wi;
            }

            out.color.at(x, y) = sum_c * (1.0 / sum_w);
            out.alpha.at(x, y) = clamp01(sum_ref / sum_w);
        }
    });
    return out;
}

Plane<Vec3> composite(const BlurLayer& raster_blur, const BlurLayer& bg_blur,
                      const BitMask& mask) {
    assert(raster_blur.width == bg_blur.width && raster_blur.height == bg_blur.height);
    Plane<Vec3> out(raster_blur.width, raster_blur.height, Vec3{0, 0, 0});
    for (int y = 0; y < raster_blur.height; ++y) {
        for (int x = 0; x < raster_blur.width; ++x) {
            if (mask.get(x, y)) {
                const double a = raster_blur.alpha.at(x, y);
                out.at(x, y) =
                    raster_blur.color.at(x, y) * a + bg_blur.color.at(x, y) * (1.0 - a);
            } else {
                out.at(x, y) = raster_blur.color.at(x, y);
            }
        }
    }
    return out;
}

}  // namespace mblur
