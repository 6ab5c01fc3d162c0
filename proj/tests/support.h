#pragma once

// Shared scene builders and independent reference implementations used by
// the unit tests and the acceptance checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mblur/gbuffer.h"
#include "mblur/postprocess.h"
#include "mblur/rayreveal.h"
#include "mblur/scene.h"

namespace testsup {

using namespace mblur;

inline std::string scene_path(const char* name) {
    return std::string(MBLUR_SCENES_DIR) + "/" + name;
}

inline Camera make_camera(int w, int h, double vfov_deg = 60.0) {
    Camera cam;
    cam.position = {0, 0, 0};
    cam.look_at = {0, 0, 1};
    cam.up = {0, 1, 0};
    cam.vfov = vfov_deg * 3.14159265358979323846 / 180.0;
    cam.width = w;
    cam.height = h;
    return cam;
}

inline Material make_material(const Vec3& albedo, const Vec3& emissive = {0, 0, 0}) {
    Material m;
    m.albedo = albedo;
    m.emissive = emissive;
    return m;
}

inline MeshInstance make_instance(int mesh_id, std::vector<Triangle> tris, const Material& mat,
                                  const Transform& pose_open, const Transform& pose_close) {
    MeshInstance inst;
    inst.mesh_id = mesh_id;
    inst.triangles = std::move(tris);
    inst.material = mat;
    inst.pose_open = pose_open;
    inst.pose_close = pose_close;
    return inst;
}

inline MeshInstance make_static_instance(int mesh_id, std::vector<Triangle> tris,
                                         const Material& mat, const Transform& pose) {
    return make_instance(mesh_id, std::move(tris), mat, pose, pose);
}

inline Transform translated(const Vec3& t, const Vec3& scale = {1, 1, 1}) {
    Transform tr;
    tr.translation = t;
    tr.scale = scale;
    return tr;
}

/// Head-on directional light plus mild ambient, so a -Z-facing surface
/// shades to exactly albedo * (ambient + intensity).
inline void add_headlight(Scene& scene, double intensity = 0.85, double ambient = 0.15) {
    Light l;
    l.kind = Light::Kind::directional;
    l.vec = {0, 0, 1};
    l.intensity = {intensity, intensity, intensity};
    scene.lights.push_back(l);
    scene.ambient = {ambient, ambient, ambient};
}

/// Scaled-down version of the bundled benchmark scene: a moving quad over a
/// checkerboard with a backing plane. speed_px is the screen-space speed of
/// the quad over the exposure in pixels.
inline Scene quad_over_checker(int size, double speed_px) {
    Scene scene;
    scene.camera = make_camera(size, size);
    scene.environment_color = {0.05, 0.06, 0.08};
    add_headlight(scene);

    const double f_px = (size / 2.0) / std::tan(scene.camera.vfov / 2.0);
    const double dx = speed_px / f_px;  // world shift at depth 1 giving speed_px
    Transform close = translated({-0.05, 0, 1}, {0.8, 0.9, 1});
    Transform open = close;
    open.translation.x -= dx;
    scene.instances.push_back(
        make_instance(1, make_quad(), make_material({0.1, 0.75, 0.1}), open, close));
    scene.instances.push_back(make_static_instance(
        2, make_checker_plane(16, 16), make_material({0.92, 0.92, 0.92}),
        translated({0, 0, 5}, {8, 8, 1})));
    scene.instances.push_back(make_static_instance(
        3, make_quad(), make_material({0.06, 0.06, 0.07}), translated({0, 0, 5.02}, {8.2, 8.2, 1})));
    return scene;
}

inline RenderConfig resolved_config(const Scene& scene) {
    RenderConfig cfg;
    cfg.resolve(scene);
    return cfg;
}

/// Config the benchmark scene uses: larger tiles so a 30 px velocity
/// survives the clamp, and a depth normalization tight enough for the
/// silhouette step to clear the Sobel threshold.
inline RenderConfig checker_config(const Scene& scene) {
    RenderConfig cfg;
    cfg.tile_size = 32;
    cfg.depth_scale = 8.0;
    cfg.resolve(scene);
    return cfg;
}

// ---- independent references ---------------------------------------------

/// Exhaustive closest-hit over the acceleration structure's triangle list,
/// with the same tie rule the traversal promises (t, mesh id, triangle
/// order). Used to validate BVH traversal.
inline std::optional<Hit> exhaustive_hit(const Accel& accel, const Ray& ray) {
    std::optional<Hit> best;
    for (int i = 0; i < static_cast<int>(accel.tris.size()); ++i) {
        double u, v;
        const std::optional<double> t = intersect_triangle(accel.tris[i], ray, &u, &v);
        if (!t) continue;
        const AccelTriangle& tri = accel.tris[i];
        if (best) {
            const AccelTriangle& bt = accel.tris[best->tri];
            if (*t > best->t) continue;
            if (*t == best->t && tri.mesh_id > bt.mesh_id) continue;
            if (*t == best->t && tri.mesh_id == bt.mesh_id && i > best->tri) continue;
        }
        Hit h;
        h.t = *t;
        h.point = ray.origin + ray.dir * *t;
        h.normal = normalize(tri.n0 * (1.0 - u - v) + tri.n1 * u + tri.n2 * v);
        h.mesh_id = tri.mesh_id;
        h.instance = tri.instance;
        h.tri = i;
        h.bu = u;
        h.bv = v;
        best = h;
    }
    return best;
}

/// Direct window scans for the tile passes.
inline TileMap tile_max_reference(const Plane<Vec2>& velocity, int k) {
    const int tx = (velocity.width() + k - 1) / k;
    const int ty = (velocity.height() + k - 1) / k;
    TileMap tiles(tx, ty, k);
    for (int j = 0; j < ty; ++j)
        for (int i = 0; i < tx; ++i) {
            Vec2 best{0, 0};
            double best_len = -1.0;
            for (int y = j * k; y < std::min((j + 1) * k, velocity.height()); ++y)
                for (int x = i * k; x < std::min((i + 1) * k, velocity.width()); ++x) {
                    const double len = velocity.at(x, y).length();
                    if (len > best_len) {
                        best_len = len;
                        best = velocity.at(x, y);
                    }
                }
            tiles.v.at(i, j) = best;
        }
    return tiles;
}

inline TileMap neighbor_max_reference(const TileMap& tiles) {
    TileMap out(tiles.tiles_x, tiles.tiles_y, tiles.tile_size);
    for (int j = 0; j < tiles.tiles_y; ++j)
        for (int i = 0; i < tiles.tiles_x; ++i) {
            Vec2 best{0, 0};
            double best_len = -1.0;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int ci = std::clamp(i + di, 0, tiles.tiles_x - 1);
                    const int cj = std::clamp(j + dj, 0, tiles.tiles_y - 1);
                    const double len = tiles.v.at(ci, cj).length();
                    if (len > best_len) {
                        best_len = len;
                        best = tiles.v.at(ci, cj);
                    }
                }
            out.v.at(i, j) = best;
        }
    return out;
}

/// Line-convolution reference for the gather filter, restricted to fields
/// where every pixel shares one surface (same id, same depth) and one
/// velocity v. The weight formula collapses to cone/cylinder terms of the
/// sample distance only; this evaluates it directly from that definition.
inline Plane<Vec3> line_gather_reference(const Plane<Vec3>& color, const Vec2& v,
                                         const RenderConfig& cfg) {
    const int w = color.width(), h = color.height();
    Plane<Vec3> out(w, h, Vec3{0, 0, 0});
    const double speed = v.length();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (speed < cfg.min_speed) {
                out.at(x, y) = color.at(x, y);
                continue;
            }
            double sum_w = cfg.sample_count / (cfg.tile_size * std::max(speed, cfg.min_speed));
            Vec3 sum_c = color.at(x, y) * sum_w;
            const double xi = hash_unit(x, y);
            for (int i = 1; i <= cfg.sample_count; ++i) {
                const double t = (i - xi) / cfg.sample_count;
                const int sx = static_cast<int>(std::lround(x + t * v.x));
                const int sy = static_cast<int>(std::lround(y + t * v.y));
                if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
                const double d =
                    std::sqrt(double(sx - x) * (sx - x) + double(sy - y) * (sy - y));
                const double cone = std::clamp(1.0 - d / std::max(speed, cfg.min_speed), 0.0, 1.0);
                double cyl;  // 1 - smoothstep(0.95 speed, 1.05 speed, d)
                if (d <= 0.95 * speed)
                    cyl = 1.0;
                else if (d >= 1.05 * speed)
                    cyl = 0.0;
                else {
                    const double u = (d - 0.95 * speed) / (0.1 * speed);
                    cyl = 1.0 - u * u * (3.0 - 2.0 * u);
                }
                const double wi = 2.0 * cone + 2.0 * cyl * cyl;
                sum_w += wi;
                sum_c += color.at(sx, sy) * wi;
            }
            out.at(x, y) = sum_c / sum_w;
        }
    }
    return out;
}

/// Deterministic random velocity field in [-limit, limit]^2.
inline Plane<Vec2> random_velocity_field(int w, int h, double limit, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Plane<Vec2> out(w, h, Vec2{0, 0});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = Vec2{dist(rng), dist(rng)};
    return out;
}

}  // namespace testsup
