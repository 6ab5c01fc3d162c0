#include "mblur/raymask.h"

#include <cmath>

namespace mblur {

BitMask candidate_mask(const GBuffer& g, const RenderConfig& cfg) {
    BitMask out(g.width, g.height);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const Vec2& v = g.velocity.at(x, y);
            if (v.length() <= cfg.min_speed) continue;
            int qx = static_cast<int>(std::lround(x + v.x));
            int qy = static_cast<int>(std::lround(y + v.y));
            if (!out.in_bounds(qx, qy)) continue;
            double dp = g.depth.at(x, y);
            double dq = g.depth.at(qx, qy);
            if (!(dq - dp > std::max(cfg.depth_delta_abs, cfg.depth_delta_rel * dp))) continue;
            if (g.mesh_id.at(qx, qy) == g.mesh_id.at(x, y)) continue;
            out.set(x, y, true);
        }
    }
    return out;
}

namespace {

// 3x3 Sobel magnitude at (x, y) of an edge-clamped scalar field.
template <typename Field>
double sobel_response(const Field& f, int x, int y) {
    double v00 = f(x - 1, y - 1), v10 = f(x, y - 1), v20 = f(x + 1, y - 1);
    double v01 = f(x - 1, y), v21 = f(x + 1, y);
    double v02 = f(x - 1, y + 1), v12 = f(x, y + 1), v22 = f(x + 1, y + 1);
    double gx = (v20 + 2.0 * v21 + v22) - (v00 + 2.0 * v01 + v02);
    double gy = (v02 + 2.0 * v12 + v22) - (v00 + 2.0 * v10 + v20);
    return std::sqrt(gx * gx + gy * gy);
}

}  // namespace

BitMask edge_mask(const GBuffer& g, const BitMask& candidates, const RenderConfig& cfg) {
    BitMask out(g.width, g.height);
    if (candidates.count() == 0) return out;

    auto depth_field = [&](int x, int y) {
        double d = g.depth.at_clamped(x, y);
        return std::min(d, cfg.depth_scale) / cfg.depth_scale;
    };
    auto nrm_field = [&](int axis) {
        return [&g, axis](int x, int y) { return g.normal.at_clamped(x, y)[axis]; };
    };

    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            if (!candidates.get(x, y)) continue;
            double e = sobel_response(depth_field, x, y);
            for (int axis = 0; axis < 3 && e <= cfg.sobel_threshold; ++axis)
                e = std::max(e, sobel_response(nrm_field(axis), x, y));
            if (e > cfg.sobel_threshold) out.set(x, y, true);
        }
    }
    return out;
}

BitMask range_check(const BitMask& edges, const GBuffer& g, const RenderConfig& cfg) {
    BitMask out(g.width, g.height);
    if (edges.count() == 0) return out;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const Vec2& v = g.velocity.at(x, y);
            double mag = v.length();
            if (mag <= cfg.min_speed) continue;
            int n = std::clamp(static_cast<int>(std::ceil(mag)), 1, cfg.range_check_max);
            for (int i = 1; i <= n; ++i) {
                double t = static_cast<double>(i) / n;
                int sx = static_cast<int>(std::lround(x + t * v.x));
                int sy = static_cast<int>(std::lround(y + t * v.y));
                if (!edges.in_bounds(sx, sy)) continue;
                if (edges.get(sx, sy)) {
                    out.set(x, y, true);
                    break;
                }
            }
        }
    }
    return out;
}

BitMask build_ray_mask(const GBuffer& g, const RenderConfig& cfg) {
    return range_check(edge_mask(g, candidate_mask(g, cfg), cfg), g, cfg);
}

}  // namespace mblur
