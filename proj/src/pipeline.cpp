#include "mblur/pipeline.h"

#include <chrono>
#include <filesystem>

#include <json.hpp>

#include "mblur/image_io.h"

namespace mblur {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::string RunReport::to_json() const {
    nlohmann::json j{{"raster_ms", raster_ms},
                     {"mask_ms", mask_ms},
                     {"accel_build_ms", accel_build_ms},
                     {"reveal_ms", reveal_ms},
                     {"tile_ms", tile_ms},
                     {"filter_raster_ms", filter_raster_ms},
                     {"filter_bg_ms", filter_bg_ms},
                     {"composite_ms", composite_ms},
                     {"total_ms", total_ms},
                     {"masked_pixels", masked_pixels},
                     {"rays_cast", rays_cast},
                     {"outputs", outputs}};
    return j.dump();
}

HybridBuffers render_hybrid(const Scene& scene, const RenderConfig& cfg, int workers) {
    HybridBuffers out;
    const auto t_total = Clock::now();

    auto t = Clock::now();
    out.g = rasterize(scene, cfg, workers);
    out.report.raster_ms = ms_since(t);

    t = Clock::now();
    out.mask_candidate = candidate_mask(out.g, cfg);
    out.mask_edge = edge_mask(out.g, out.mask_candidate, cfg);
    out.mask_ray = range_check(out.mask_edge, out.g, cfg);
    out.report.mask_ms = ms_since(t);
    out.report.masked_pixels = static_cast<uint64_t>(out.mask_ray.count());

    t = Clock::now();
    const Accel accel = build_accel(scene);
    out.report.accel_build_ms = ms_since(t);

    t = Clock::now();
    out.bg = reveal_pass(out.mask_ray, out.g, accel, scene, cfg, workers, &out.report.rays_cast);
    out.report.reveal_ms = ms_since(t);

    // The background layer reuses the raster planes wherever the reveal found
    // nothing, so the filter always reads meaningful neighbors.
    Plane<Vec3> bg_color = out.g.color;
    Plane<double> bg_depth = out.g.depth;
    Plane<Vec2> bg_velocity = out.g.velocity;
    for (int y = 0; y < out.g.height; ++y) {
        for (int x = 0; x < out.g.width; ++x) {
            if (!out.bg.valid.at(x, y)) continue;
            bg_color.at(x, y) = out.bg.color.at(x, y);
            bg_depth.at(x, y) = out.bg.depth.at(x, y);
            bg_velocity.at(x, y) = out.bg.velocity.at(x, y);
        }
    }

    t = Clock::now();
    const TileMap nmax_raster = neighbor_max(tile_max(out.g.velocity, cfg.tile_size));
    const TileMap nmax_bg = neighbor_max(tile_max(bg_velocity, cfg.tile_size));
    out.report.tile_ms = ms_since(t);

    t = Clock::now();
    out.raster_blur = blur_filter(out.g.color, out.g.depth, out.g.velocity, out.g.mesh_id,
                                  out.g.mesh_id, nmax_raster, cfg, workers);
    out.report.filter_raster_ms = ms_since(t);

    t = Clock::now();
    out.bg_blur = blur_filter(bg_color, bg_depth, bg_velocity, out.g.mesh_id, out.g.mesh_id,
                              nmax_bg, cfg, workers);
    out.report.filter_bg_ms = ms_since(t);

    t = Clock::now();
    out.color = composite(out.raster_blur, out.bg_blur, out.mask_ray);
    out.report.composite_ms = ms_since(t);

    out.report.total_ms = ms_since(t_total);
    return out;
}

Plane<uint8_t> mask_to_gray(const BitMask& mask) {
    Plane<uint8_t> out(mask.width(), mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) out.at(x, y) = mask.get(x, y) ? 255 : 0;
    return out;
}

std::vector<std::string> dump_buffers(const HybridBuffers& bufs, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> paths;
    auto at = [&](const char* name) {
        paths.push_back((fs::path(dir) / name).string());
        return paths.back();
    };

    write_pfm(at("depth.pfm"), bufs.g.depth);
    write_pfm(at("normal.pfm"), bufs.g.normal);
    write_png_gray16(at("mesh_id.png"), bufs.g.mesh_id);
    write_pfm(at("velocity.pfm"), bufs.g.velocity);
    write_pfm(at("albedo.pfm"), bufs.g.albedo);
    write_pfm(at("color_raster.pfm"), bufs.g.color);

    write_png_gray8(at("mask_candidate.png"), mask_to_gray(bufs.mask_candidate));
    write_png_gray8(at("mask_edge.png"), mask_to_gray(bufs.mask_edge));
    write_png_gray8(at("mask_ray.png"), mask_to_gray(bufs.mask_ray));

    write_pfm(at("bg_color.pfm"), bufs.bg.color);
    write_pfm(at("bg_depth.pfm"), bufs.bg.depth);
    write_pfm(at("bg_velocity.pfm"), bufs.bg.velocity);
    Plane<uint8_t> valid_gray(bufs.bg.valid.width(), bufs.bg.valid.height(), 0);
    for (int y = 0; y < valid_gray.height(); ++y)
        for (int x = 0; x < valid_gray.width(); ++x)
            valid_gray.at(x, y) = bufs.bg.valid.at(x, y) ? 255 : 0;
    write_png_gray8(at("bg_valid.png"), valid_gray);

    write_pfm(at("blur_raster.pfm"), bufs.raster_blur.color);
    write_pfm(at("blur_bg.pfm"), bufs.bg_blur.color);
    write_pfm(at("alpha.pfm"), bufs.raster_blur.alpha);

    write_pfm(at("color.pfm"), bufs.color);
    write_png_rgb8(at("color.png"), bufs.color);
    return paths;
}

}  // namespace mblur
