#include "mblur/oracle.h"

#include <cmath>
#include <stdexcept>

#include "mblur/parallel.h"
#include "mblur/postprocess.h"
#include "mblur/rayreveal.h"

namespace mblur {

Image ground_truth(const Scene& scene, const RenderConfig& cfg, int workers) {
    const int w = scene.camera.width;
    const int h = scene.camera.height;
    const int nt = cfg.ground_truth_time_samples;
    const CameraFrame frame(scene.camera);

    Image sum(w, h, Vec3{0, 0, 0});
    for (int j = 0; j < nt; ++j) {
        const double t = (j + 0.5) / nt;
        const Accel accel = build_accel(scene, t);
        parallel_rows(h, workers, [&](int y) {
            for (int x = 0; x < w; ++x) {
                Ray ray;
                ray.origin = scene.camera.position;
                ray.dir = pixel_ray_direction(frame, x, y);
                const std::optional<Hit> hit = closest_hit(accel, ray);
                const Color c =
                    hit ? shade(hit->point, hit->normal, scene.instances[hit->instance].material,
                                scene)
                        : scene.environment_color;
                sum.at(x, y) = sum.at(x, y) + c;
            }
        });
    }

    const double inv = 1.0 / nt;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) sum.at(x, y) = sum.at(x, y) * inv;
    return sum;
}

Image baseline(const Scene& scene, const RenderConfig& cfg, int workers) {
    const GBuffer g = rasterize(scene, cfg, workers);
    const TileMap nmax = neighbor_max(tile_max(g.velocity, cfg.tile_size));
    BlurLayer layer =
        blur_filter(g.color, g.depth, g.velocity, g.mesh_id, g.mesh_id, nmax, cfg, workers);
    return std::move(layer.color);
}

GBuffer background_oracle(const Scene& scene, const std::set<int>& exclude_ids,
                          const RenderConfig& cfg, int workers) {
    for (int id : exclude_ids) {
        bool found = false;
        for (const MeshInstance& inst : scene.instances) found = found || inst.mesh_id == id;
        if (!found)
            throw std::runtime_error("background oracle: mesh id " + std::to_string(id) +
                                     " not in scene");
    }

    Scene reduced = scene;
    reduced.instances.clear();
    for (const MeshInstance& inst : scene.instances)
        if (!exclude_ids.count(inst.mesh_id)) reduced.instances.push_back(inst);
    return rasterize(reduced, cfg, workers);
}

double psnr(const Image& a, const Image& b, const BitMask* mask) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::runtime_error("psnr: image dimensions differ");
    if (mask && mask->count() == 0) throw std::runtime_error("psnr: empty mask");

    double se = 0.0;
    long n = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (mask && !mask->get(x, y)) continue;
            const Vec3& pa = a.at(x, y);
            const Vec3& pb = b.at(x, y);
            const double dr = clamp01(pa.x) - clamp01(pb.x);
            const double dg = clamp01(pa.y) - clamp01(pb.y);
            const double db = clamp01(pa.z) - clamp01(pb.z);
            se += dr * dr + dg * dg + db * db;
            n += 3;
        }
    }

    const double mse = se / n;
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

}  // namespace mblur
