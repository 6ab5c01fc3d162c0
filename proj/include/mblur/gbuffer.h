#pragma once

#include "mblur/plane.h"
#include "mblur/scene.h"
#include "mblur/vec.h"

namespace mblur {

/// Deferred-shading G-buffer. Background pixels (mesh_id 0) carry depth
/// +inf, zero normal and velocity, and the environment color.
struct GBuffer {
    int width = 0;
    int height = 0;
    Plane<double> depth;     // camera-space depth, scene units
    Plane<Vec3> normal;      // unit world-space normal
    Plane<int> mesh_id;      // 0 = none
    Plane<Vec2> velocity;    // screen displacement over the exposure, px, |v| <= tile_size
    Plane<Vec3> albedo;
    Plane<Vec3> color;       // shaded linear RGB

    GBuffer() = default;
    GBuffer(int w, int h);
};

/// Rasterizes the scene at the shutter-close pose with a closest-depth test
/// at pixel centers. Velocity is the open-to-close screen displacement of
/// the surface point under each pixel, clamped to tile_size. Output is
/// identical for any worker count.
GBuffer rasterize(const Scene& scene, const RenderConfig& cfg, int workers = 1);

/// Local shading: emissive + albedo * (ambient + sum of max(0, n.l) terms).
/// Point lights fall off as 1/r^2; no shadowing.
Color shade(const Vec3& point, const Vec3& normal, const Material& material, const Scene& scene);

/// Rec. 709 luma of linear RGB.
inline double luminance(const Color& c) {
    return 0.2126 * c.x + 0.7152 * c.y + 0.0722 * c.z;
}

}  // namespace mblur
