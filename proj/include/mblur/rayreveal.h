#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mblur/gbuffer.h"
#include "mblur/raymask.h"
#include "mblur/scene.h"

namespace mblur {

struct Ray {
    Vec3 origin;
    Vec3 dir;          // unit length
    double t_min = 0.0;
    double t_max = std::numeric_limits<double>::infinity();
};

struct Hit {
    double t = 0.0;
    Vec3 point;
    Vec3 normal;       // interpolated vertex normal, unit length
    int mesh_id = 0;
    int instance = -1;   // index into Scene::instances
    int tri = -1;        // index into Accel::tris
    double bu = 0.0, bv = 0.0;   // barycentrics of vertices 1 and 2
};

/// World-space triangle record held by the acceleration structure.
struct AccelTriangle {
    Vec3 p0, p1, p2;     // world space at the rasterized pose
    Vec3 n0, n1, n2;     // world space, unit
    Vec3 o0, o1, o2;     // object space (for velocity under either pose)
    int mesh_id = 0;
    int instance = -1;
};

struct AccelNode {
    Vec3 box_min, box_max;
    int left = -1;       // internal: child node indices
    int right = -1;
    int first = 0;       // leaf: range into Accel::order
    int count = 0;       // 0 for internal nodes
};

/// Binary median-split BVH over triangle centroids, leaves holding at most
/// 4 triangles. Traversal returns exactly the hit an exhaustive scan finds.
struct Accel {
    std::vector<AccelTriangle> tris;
    std::vector<int> order;          // leaf ranges index tris through this
    std::vector<AccelNode> nodes;    // nodes[0] is the root when non-empty
};

/// Möller-Trumbore with inclusive edges; hits with t in (t_min, t_max].
/// Shared by traversal and the brute-force reference path so both report
/// identical intersections.
std::optional<double> intersect_triangle(const AccelTriangle& tri, const Ray& ray,
                                         double* out_u = nullptr, double* out_v = nullptr);

/// Builds the BVH over all scene triangles posed at time t (default: the
/// rasterized shutter-close pose).
Accel build_accel(const Scene& scene, double t = 1.0);

/// Nearest hit; ties broken by smaller mesh_id, then triangle order.
std::optional<Hit> closest_hit(const Accel& accel, const Ray& ray);

/// Ray-revealed background at masked pixels; invalid pixels carry the
/// sentinels black / +inf / zero velocity.
struct BackgroundBuffer {
    int width = 0;
    int height = 0;
    Plane<uint8_t> valid;
    Plane<Vec3> color;
    Plane<double> depth;
    Plane<Vec2> velocity;

    BackgroundBuffer() = default;
    BackgroundBuffer(int w, int h);
};

struct RevealSample {
    Color color{0, 0, 0};
    double depth = std::numeric_limits<double>::infinity();
    Vec2 velocity{0, 0};
    bool valid = false;
    int rays_cast = 0;
};

/// Recursive ray advance for one masked pixel: casts the primary ray, then
/// re-casts from each hit along the same direction until a hit reads as a
/// different object (luminance or mesh id, per cfg.id_mode), the ray leaves
/// the scene, or max_recursion advances elapse. At most max_recursion + 1
/// casts.
RevealSample reveal(int px, int py, const Accel& accel, const Scene& scene,
                    const RenderConfig& cfg);

/// Applies reveal at every masked pixel. rays_cast, when given, receives the
/// total number of ray casts (deterministic for fixed inputs).
BackgroundBuffer reveal_pass(const BitMask& mask, const GBuffer& g, const Accel& accel,
                             const Scene& scene, const RenderConfig& cfg, int workers = 1,
                             uint64_t* rays_cast = nullptr);

}  // namespace mblur
