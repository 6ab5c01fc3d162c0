#include "mblur/gbuffer.h"

#include <cmath>
#include <limits>

#include "mblur/parallel.h"

namespace mblur {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNearClip = 1e-4;
}  // namespace

GBuffer::GBuffer(int w, int h)
    : width(w),
      height(h),
      depth(w, h, kInf),
      normal(w, h, Vec3{0, 0, 0}),
      mesh_id(w, h, 0),
      velocity(w, h, Vec2{0, 0}),
      albedo(w, h, Vec3{0, 0, 0}),
      color(w, h, Vec3{0, 0, 0}) {}

Color shade(const Vec3& point, const Vec3& normal, const Material& material, const Scene& scene) {
    Color incident = scene.ambient;
    for (const Light& light : scene.lights) {
        if (light.kind == Light::Kind::directional) {
            Vec3 l = -light.vec;
            double ndl = dot(normal, l);
            if (ndl > 0.0) incident += light.intensity * ndl;
        } else {
            Vec3 d = light.vec - point;
            double dist_sq = d.length_sq();
            if (dist_sq <= 0.0) continue;
            Vec3 l = d / std::sqrt(dist_sq);
            double ndl = dot(normal, l);
            if (ndl > 0.0) incident += light.intensity * (ndl / dist_sq);
        }
    }
    return material.emissive + material.albedo * incident;
}

namespace {

struct ClipVertex {
    Vec3 cam;       // camera space
    Vec3 obj;       // object space (for velocity)
    Vec3 nrm;       // world space
};

// Sutherland-Hodgman against the z > kNearClip plane. Attributes lerp
// linearly, which is exact in camera space.
int clip_near(const ClipVertex in[3], ClipVertex out[4]) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const ClipVertex& a = in[i];
        const ClipVertex& b = in[(i + 1) % 3];
        bool a_in = a.cam.z > kNearClip;
        bool b_in = b.cam.z > kNearClip;
        if (a_in) out[n++] = a;
        if (a_in != b_in) {
            double t = (kNearClip - a.cam.z) / (b.cam.z - a.cam.z);
            ClipVertex v;
            v.cam = lerp(a.cam, b.cam, t);
            v.obj = lerp(a.obj, b.obj, t);
            v.nrm = lerp(a.nrm, b.nrm, t);
            out[n++] = v;
        }
    }
    return n;
}

struct RasterFragmentPlanes {
    Plane<double> depth;
    Plane<int> inst;      // -1 = none
    Plane<int> mesh;
    Plane<long> seq;      // triangle sequence for deterministic ties
    Plane<Vec3> obj;
    Plane<Vec3> nrm;
};

struct ScreenVertex {
    double x, y;      // pixels
    double inv_z;
    Vec3 obj_over_z;
    Vec3 nrm_over_z;
};

}  // namespace

GBuffer rasterize(const Scene& scene, const RenderConfig& cfg, int workers) {
    const Camera& cam = scene.camera;
    const int w = cam.width, h = cam.height;
    CameraFrame frame(cam);

    RasterFragmentPlanes frag{Plane<double>(w, h, kInf), Plane<int>(w, h, -1),
                              Plane<int>(w, h, 0),       Plane<long>(w, h, 0),
                              Plane<Vec3>(w, h),         Plane<Vec3>(w, h)};

    // Each worker owns a contiguous band of rows and walks every triangle,
    // so the depth test never races and the lexicographic (depth, mesh_id,
    // sequence) tie-break makes the result order-independent.
    int bands = std::max(1, std::min(workers, h));
    parallel_rows(bands, bands, [&](int band) {
        int rows = (h + bands - 1) / bands;
        int band_y0 = band * rows;
        int band_y1 = std::min(h, band_y0 + rows);
        if (band_y0 >= band_y1) return;

        long seq = 0;
        for (size_t ii = 0; ii < scene.instances.size(); ++ii) {
            const MeshInstance& inst = scene.instances[ii];
            PosedTransform pose(pose_at(inst, 1.0));
            for (const Triangle& tri : inst.triangles) {
                ++seq;
                ClipVertex cv[3];
                for (int k = 0; k < 3; ++k) {
                    Vec3 world = pose.point(tri.pos[k]);
                    Vec3 rel = world - frame.origin;
                    cv[k].cam = {dot(rel, frame.right), dot(rel, frame.upv),
                                 dot(rel, frame.forward)};
                    cv[k].obj = tri.pos[k];
                    cv[k].nrm = pose.normal(tri.nrm[k]);
                }
                ClipVertex poly[4];
                int n = clip_near(cv, poly);
                if (n < 3) continue;

                ScreenVertex sv[4];
                for (int k = 0; k < n; ++k) {
                    double inv_z = 1.0 / poly[k].cam.z;
                    sv[k].x = frame.half_w + frame.f_px * poly[k].cam.x * inv_z;
                    sv[k].y = frame.half_h - frame.f_px * poly[k].cam.y * inv_z;
                    sv[k].inv_z = inv_z;
                    sv[k].obj_over_z = poly[k].obj * inv_z;
                    sv[k].nrm_over_z = poly[k].nrm * inv_z;
                }

                for (int f = 2; f < n; ++f) {
                    const ScreenVertex& v0 = sv[0];
                    const ScreenVertex& v1 = sv[f - 1];
                    const ScreenVertex& v2 = sv[f];

                    double area = (v1.x - v0.x) * (v2.y - v0.y) - (v1.y - v0.y) * (v2.x - v0.x);
                    if (area == 0.0) continue;   // degenerate in screen space
                    double inv_area = 1.0 / area;

                    double min_x = std::min({v0.x, v1.x, v2.x});
                    double max_x = std::max({v0.x, v1.x, v2.x});
                    double min_y = std::min({v0.y, v1.y, v2.y});
                    double max_y = std::max({v0.y, v1.y, v2.y});

                    int x0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
                    int x1 = std::min(w - 1, static_cast<int>(std::ceil(max_x - 0.5)));
                    int y0 = std::max(band_y0, static_cast<int>(std::floor(min_y - 0.5)));
                    int y1 = std::min(band_y1 - 1, static_cast<int>(std::ceil(max_y - 0.5)));

                    for (int y = y0; y <= y1; ++y) {
                        double py = y + 0.5;
                        for (int x = x0; x <= x1; ++x) {
                            double px = x + 0.5;
                            double l0 = ((v1.x - px) * (v2.y - py) - (v1.y - py) * (v2.x - px)) *
                                        inv_area;
                            double l1 = ((v2.x - px) * (v0.y - py) - (v2.y - py) * (v0.x - px)) *
                                        inv_area;
                            double l2 = 1.0 - l0 - l1;
                            if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;

                            double inv_z = l0 * v0.inv_z + l1 * v1.inv_z + l2 * v2.inv_z;
                            double z = 1.0 / inv_z;

                            double& zb = frag.depth.at(x, y);
                            int mid = inst.mesh_id;
                            if (z < zb || (z == zb && (mid < frag.mesh.at(x, y) ||
                                                       (mid == frag.mesh.at(x, y) &&
                                                        seq < frag.seq.at(x, y))))) {
                                zb = z;
                                frag.inst.at(x, y) = static_cast<int>(ii);
                                frag.mesh.at(x, y) = mid;
                                frag.seq.at(x, y) = seq;
                                frag.obj.at(x, y) =
                                    (l0 * v0.obj_over_z + l1 * v1.obj_over_z + l2 * v2.obj_over_z) *
                                    z;
                                frag.nrm.at(x, y) =
                                    (l0 * v0.nrm_over_z + l1 * v1.nrm_over_z + l2 * v2.nrm_over_z) *
                                    z;
                            }
                        }
                    }
                }
            }
        }
    });

    // Deferred pass: shade and compute per-pixel velocity from the surviving
    // fragment's object-space position under both shutter poses.
    GBuffer g(w, h);
    std::vector<PosedTransform> open_poses, close_poses;
    open_poses.reserve(scene.instances.size());
    close_poses.reserve(scene.instances.size());
    for (const auto& inst : scene.instances) {
        open_poses.emplace_back(pose_at(inst, 0.0));
        close_poses.emplace_back(pose_at(inst, 1.0));
    }
    const double max_speed = static_cast<double>(cfg.tile_size);

    parallel_rows(h, workers, [&](int y) {
        for (int x = 0; x < w; ++x) {
            int ii = frag.inst.at(x, y);
            if (ii < 0) {
                g.color.at(x, y) = scene.environment_color;
                continue;
            }
            const MeshInstance& inst = scene.instances[ii];
            Vec3 obj = frag.obj.at(x, y);
            Vec3 world = close_poses[ii].point(obj);
            Vec3 n = normalize(frag.nrm.at(x, y));

            g.depth.at(x, y) = frag.depth.at(x, y);
            g.normal.at(x, y) = n;
            g.mesh_id.at(x, y) = inst.mesh_id;
            g.albedo.at(x, y) = inst.material.albedo;
            g.color.at(x, y) = shade(world, n, inst.material, scene);

            if (!inst.is_static()) {
                auto close = project(frame, world);
                auto open = project(frame, open_poses[ii].point(obj));
                if (close && open) {
                    Vec2 v = close->screen - open->screen;
                    double mag = v.length();
                    if (mag > max_speed) v = v * (max_speed / mag);
                    g.velocity.at(x, y) = v;
                }
            }
        }
    });
    return g;
}

}  // namespace mblur
