#include "mblur/rayreveal.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "mblur/parallel.h"

namespace mblur {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 tri_min(const AccelTriangle& t) { return min3(min3(t.p0, t.p1), t.p2); }
Vec3 tri_max(const AccelTriangle& t) { return max3(max3(t.p0, t.p1), t.p2); }

struct Builder {
    const std::vector<AccelTriangle>& tris;
    std::vector<Vec3> centroids;
    std::vector<int>& order;
    std::vector<AccelNode>& nodes;

    int build(int first, int count) {
        AccelNode node;
        node.box_min = Vec3{kInf, kInf, kInf};
        node.box_max = Vec3{-kInf, -kInf, -kInf};
        Vec3 cmin = node.box_min, cmax = node.box_max;
        for (int i = first; i < first + count; ++i) {
            const AccelTriangle& t = tris[order[i]];
            node.box_min = min3(node.box_min, tri_min(t));
            node.box_max = max3(node.box_max, tri_max(t));
            cmin = min3(cmin, centroids[order[i]]);
            cmax = max3(cmax, centroids[order[i]]);
        }

        const int index = static_cast<int>(nodes.size());
        nodes.push_back(node);

        const Vec3 extent = cmax - cmin;
        const bool splittable = extent.x > 0.0 || extent.y > 0.0 || extent.z > 0.0;
        if (count <= 4 || !splittable) {
            nodes[index].first = first;
            nodes[index].count = count;
            return index;
        }

        int axis = 0;
        if (extent.y > extent.x) axis = 1;
        if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;

        // Median split on (centroid, index) so the partition never depends on
        // the incoming order and rebuilds are bit-identical.
        const int mid = first + count / 2;
        auto key = [&](int i) {
            const Vec3& c = centroids[i];
            const double v = axis == 0 ? c.x : axis == 1 ? c.y : c.z;
            return std::pair<double, int>(v, i);
        };
        std::nth_element(order.begin() + first, order.begin() + mid,
                         order.begin() + first + count,
                         [&](int a, int b) { return key(a) < key(b); });

        const int left = build(first, mid - first);
        const int right = build(mid, first + count - mid);
        nodes[index].left = left;
        nodes[index].right = right;
        return index;
    }
};

// Slab test; reports the entry distance so traversal can skip boxes that lie
// strictly beyond the best hit.
bool hit_box(const AccelNode& node, const Ray& ray, const Vec3& inv_dir, double best_t,
             double* t_enter) {
    double t0 = ray.t_min;
    double t1 = best_t;
    for (int axis = 0; axis < 3; ++axis) {
        const double lo = axis == 0 ? node.box_min.x : axis == 1 ? node.box_min.y : node.box_min.z;
        const double hi = axis == 0 ? node.box_max.x : axis == 1 ? node.box_max.y : node.box_max.z;
        const double o = axis == 0 ? ray.origin.x : axis == 1 ? ray.origin.y : ray.origin.z;
        const double inv = axis == 0 ? inv_dir.x : axis == 1 ? inv_dir.y : inv_dir.z;
        double near = (lo - o) * inv;
        double far = (hi - o) * inv;
        if (near > far) std::swap(near, far);
        t0 = std::max(t0, near);
        t1 = std::min(t1, far);
        if (t0 > t1) return false;
    }
    *t_enter = t0;
    return true;
}

}  // namespace

std::optional<double> intersect_triangle(const AccelTriangle& tri, const Ray& ray, double* out_u,
                                         double* out_v) {
    const Vec3 e1 = tri.p1 - tri.p0;
    const Vec3 e2 = tri.p2 - tri.p0;
    const Vec3 pvec = cross(ray.dir, e2);
    const double det = dot(e1, pvec);
    if (std::abs(det) < 1e-14) return std::nullopt;
    const double inv_det = 1.0 / det;

    const Vec3 tvec = ray.origin - tri.p0;
    const double u = dot(tvec, pvec) * inv_det;
    if (u < 0.0 || u > 1.0) return std::nullopt;

    const Vec3 qvec = cross(tvec, e1);
    const double v = dot(ray.dir, qvec) * inv_det;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;

    const double t = dot(e2, qvec) * inv_det;
    if (t <= ray.t_min || t > ray.t_max) return std::nullopt;

    if (out_u) *out_u = u;
    if (out_v) *out_v = v;
    return t;
}

Accel build_accel(const Scene& scene, double t) {
    Accel accel;
    for (int ii = 0; ii < static_cast<int>(scene.instances.size()); ++ii) {
        const MeshInstance& inst = scene.instances[ii];
        const PosedTransform pose(pose_at(inst, t));
        for (const Triangle& tri : inst.triangles) {
            AccelTriangle at;
            at.p0 = pose.point(tri.pos[0]);
            at.p1 = pose.point(tri.pos[1]);
            at.p2 = pose.point(tri.pos[2]);
            at.n0 = pose.normal(tri.nrm[0]);
            at.n1 = pose.normal(tri.nrm[1]);
            at.n2 = pose.normal(tri.nrm[2]);
            at.o0 = tri.pos[0];
            at.o1 = tri.pos[1];
            at.o2 = tri.pos[2];
            at.mesh_id = inst.mesh_id;
            at.instance = ii;
            accel.tris.push_back(at);
        }
    }

    const int n = static_cast<int>(accel.tris.size());
    accel.order.resize(n);
    std::iota(accel.order.begin(), accel.order.end(), 0);
    if (n == 0) return accel;

    Builder builder{accel.tris, {}, accel.order, accel.nodes};
    builder.centroids.reserve(n);
    for (const AccelTriangle& at : accel.tris)
        builder.centroids.push_back((at.p0 + at.p1 + at.p2) * (1.0 / 3.0));
    builder.build(0, n);
    return accel;
}

std::optional<Hit> closest_hit(const Accel& accel, const Ray& ray) {
    if (accel.nodes.empty()) return std::nullopt;

    const Vec3 inv_dir{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
    double best_t = ray.t_max;
    int best_tri = -1;
    double best_u = 0.0, best_v = 0.0;

    // Ties at identical t resolve to the smaller mesh id, then the earlier
    // triangle, regardless of traversal order; boxes are only skipped when
    // strictly beyond best_t so equal-t candidates are still visited.
    auto better = [&](double t, int tri) {
        if (best_tri < 0) return true;
        if (t != best_t) return t < best_t;
        const AccelTriangle& a = accel.tris[tri];
        const AccelTriangle& b = accel.tris[best_tri];
        if (a.mesh_id != b.mesh_id) return a.mesh_id < b.mesh_id;
        return tri < best_tri;
    };

    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const AccelNode& node = accel.nodes[stack[--top]];
        double t_enter;
        if (!hit_box(node, ray, inv_dir, best_t, &t_enter)) continue;
        if (node.count > 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int tri = accel.order[i];
                double u, v;
                Ray probe = ray;
                probe.t_max = best_t;
                const std::optional<double> t = intersect_triangle(accel.tris[tri], probe, &u, &v);
                // Re-test exact ties against t_max: probe.t_max == best_t keeps
                // equal-t hits visible for the lexicographic comparison.
                if (!t || !better(*t, tri)) continue;
                best_t = *t;
                best_tri = tri;
                best_u = u;
                best_v = v;
            }
        } else {
            assert(top + 2 <= 64);
            stack[top++] = node.right;
            stack[top++] = node.left;
        }
    }

    if (best_tri < 0) return std::nullopt;
    const AccelTriangle& tri = accel.tris[best_tri];
    const double w = 1.0 - best_u - best_v;
    Hit hit;
    hit.t = best_t;
    hit.point = ray.origin + ray.dir * best_t;
    hit.normal = normalize(tri.n0 * w + tri.n1 * best_u + tri.n2 * best_v);
    hit.mesh_id = tri.mesh_id;
    hit.instance = tri.instance;
    hit.tri = best_tri;
    hit.bu = best_u;
    hit.bv = best_v;
    return hit;
}

BackgroundBuffer::BackgroundBuffer(int w, int h)
    : width(w),
      height(h),
      valid(w, h, 0),
      color(w, h, Vec3{0, 0, 0}),
      depth(w, h, kInf),
      velocity(w, h, Vec2{0, 0}) {}

RevealSample reveal(int px, int py, const Accel& accel, const Scene& scene,
                    const RenderConfig& cfg) {
    RevealSample out;
    const CameraFrame frame(scene.camera);

    Ray ray;
    ray.origin = scene.camera.position;
    ray.dir = pixel_ray_direction(frame, px, py);

    ++out.rays_cast;
    std::optional<Hit> hit = closest_hit(accel, ray);
    if (!hit) return out;  // mask fired on a pixel the geometry no longer covers

    const int front_mesh = hit->mesh_id;
    const Material& front_mat = scene.instances[hit->instance].material;
    const double front_lum = luminance(shade(hit->point, hit->normal, front_mat, scene));

    for (int step = 0; step < cfg.max_recursion; ++step) {
        ray.origin = hit->point + ray.dir * cfg.ray_epsilon;
        ++out.rays_cast;
        hit = closest_hit(accel, ray);

        if (!hit) {
            // Escaped the scene: the environment is the revealed background.
            out.color = scene.environment_color;
            out.depth = kInf;
            out.velocity = Vec2{0, 0};
            out.valid = true;
            return out;
        }

        const MeshInstance& inst = scene.instances[hit->instance];
        const Color shaded = shade(hit->point, hit->normal, inst.material, scene);

        const bool different = cfg.id_mode == IdMode::mesh
                                   ? hit->mesh_id != front_mesh
                                   : std::abs(luminance(shaded) - front_lum) > cfg.luminance_tol;
        if (!different) continue;

        out.color = shaded;
        out.depth = dot(hit->point - scene.camera.position, frame.forward);

        // Same velocity the raster pass stores: screen motion of the hit's
        // object-space point between the shutter endpoints, clamped.
        if (!inst.is_static()) {
            const AccelTriangle& tri = accel.tris[hit->tri];
            const double w = 1.0 - hit->bu - hit->bv;
            const Vec3 obj = tri.o0 * w + tri.o1 * hit->bu + tri.o2 * hit->bv;
            const PosedTransform open_pose(pose_at(inst, 0.0));
            const PosedTransform close_pose(pose_at(inst, 1.0));
            const std::optional<Projected> a = project(frame, close_pose.point(obj));
            const std::optional<Projected> b = project(frame, open_pose.point(obj));
            if (a && b) {
                Vec2 vel = a->screen - b->screen;
                const double len = vel.length();
                if (len > cfg.tile_size) vel = vel * (cfg.tile_size / len);
                out.velocity = vel;
            }
        }
        out.valid = true;
        return out;
    }
    return out;  // every advance stayed on the occluder
}

BackgroundBuffer reveal_pass(const BitMask& mask, const GBuffer& g, const Accel& accel,
                             const Scene& scene, const RenderConfig& cfg, int workers,
                             uint64_t* rays_cast) {
    BackgroundBuffer bg(g.width, g.height);
    std::vector<uint64_t> row_rays(static_cast<size_t>(g.height), 0);

    parallel_rows(g.height, workers, [&](int y) {
        for (int x = 0; x < g.width; ++x) {
            if (!mask.get(x, y)) continue;
            const RevealSample s = reveal(x, y, accel, scene, cfg);
            row_rays[static_cast<size_t>(y)] += static_cast<uint64_t>(s.rays_cast);
            if (!s.valid) continue;
            bg.valid.at(x, y) = 1;
            bg.color.at(x, y) = s.color;
            bg.depth.at(x, y) = s.depth;
            bg.velocity.at(x, y) = s.velocity;
        }
    });

    if (rays_cast) *rays_cast = std::accumulate(row_rays.begin(), row_rays.end(), uint64_t{0});
    return bg;
}

}  // namespace mblur
