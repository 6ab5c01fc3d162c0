// Command-line driver: renders a scene in any pipeline mode, compares two
// renders (or PFM files) by PSNR, and dumps every intermediate buffer.
#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mblur/image_io.h"
#include "mblur/parallel.h"
#include "mblur/pipeline.h"

namespace {

using namespace mblur;

/// Render-config flags shared by every subcommand; only flags the user
/// actually passed override the scene file.
struct ConfigOverrides {
    std::optional<int> samples, tile_size, range_check_max, max_recursion, time_samples;
    std::optional<double> min_speed, depth_delta_rel, depth_delta_abs, sobel_threshold;
    std::optional<double> depth_scale, z_extent, luminance_tol, ray_epsilon;
    std::optional<std::string> id_mode;

    void attach(CLI::App* cmd) {
        cmd->add_option("--samples", samples, "Gather samples per pixel (odd)");
        cmd->add_option("--tile-size", tile_size, "Tile edge in pixels / velocity clamp");
        cmd->add_option("--min-speed", min_speed, "Speed below which a pixel is static (px)");
        cmd->add_option("--depth-delta-rel", depth_delta_rel, "Relative depth gap for the mask");
        cmd->add_option("--depth-delta-abs", depth_delta_abs, "Absolute depth gap for the mask");
        cmd->add_option("--sobel-threshold", sobel_threshold, "Edge response cut");
        cmd->add_option("--depth-scale", depth_scale, "Depth normalization for the edge pass");
        cmd->add_option("--range-check-max", range_check_max, "Max samples along displacement");
        cmd->add_option("--max-recursion", max_recursion, "Ray advances after the first hit");
        cmd->add_option("--luminance-tol", luminance_tol, "Reveal termination tolerance");
        cmd->add_option("--ray-epsilon", ray_epsilon, "Ray advance offset (scene units)");
        cmd->add_option("--z-extent", z_extent, "Soft depth window of the filter");
        cmd->add_option("--id-mode", id_mode, "Reveal termination test")
            ->check(CLI::IsMember({"luminance", "mesh"}));
        cmd->add_option("--time-samples", time_samples, "Shutter samples for ground truth");
    }

    void apply(RenderConfig& cfg, const Scene& scene) const {
        if (samples) cfg.sample_count = *samples;
        if (tile_size) cfg.tile_size = *tile_size;
        if (min_speed) cfg.min_speed = *min_speed;
        if (depth_delta_rel) cfg.depth_delta_rel = *depth_delta_rel;
        if (depth_delta_abs) cfg.depth_delta_abs = *depth_delta_abs;
        if (sobel_threshold) cfg.sobel_threshold = *sobel_threshold;
        if (range_check_max) cfg.range_check_max = *range_check_max;
        if (max_recursion) cfg.max_recursion = *max_recursion;
        if (luminance_tol) cfg.luminance_tol = *luminance_tol;
        if (ray_epsilon) cfg.ray_epsilon = *ray_epsilon;
        if (id_mode) cfg.id_mode = *id_mode == "mesh" ? IdMode::mesh : IdMode::luminance;
        if (time_samples) cfg.ground_truth_time_samples = *time_samples;
        if (depth_scale) {
            cfg.depth_scale = *depth_scale;
            if (!z_extent) cfg.z_extent = 0.0;  // re-derive from the new scale
        }
        if (z_extent) cfg.z_extent = *z_extent;
        cfg.resolve(scene);
    }
};

bool is_mode(const std::string& s) {
    return s == "hybrid" || s == "baseline" || s == "groundtruth";
}

Image render_mode(const std::string& mode, const Scene& scene, const RenderConfig& cfg,
                  int workers, RunReport* report) {
    const auto start = std::chrono::steady_clock::now();
    Image img;
    if (mode == "hybrid") {
        HybridBuffers bufs = render_hybrid(scene, cfg, workers);
        if (report) *report = bufs.report;
        return std::move(bufs.color);
    }
    img = mode == "baseline" ? baseline(scene, cfg, workers) : ground_truth(scene, cfg, workers);
    if (report)
        report->total_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
    return img;
}

int run_render(const std::string& scene_path, const std::string& mode, const std::string& out_png,
               const std::string& out_pfm, const std::string& dump_dir,
               const ConfigOverrides& overrides, int workers) {
    auto [scene, cfg] = load_scene(scene_path);
    overrides.apply(cfg, scene);

    RunReport report;
    Image img;
    if (mode == "hybrid") {
        HybridBuffers bufs = render_hybrid(scene, cfg, workers);
        report = bufs.report;
        if (!dump_dir.empty()) {
            std::vector<std::string> dumped = dump_buffers(bufs, dump_dir);
            report.outputs.insert(report.outputs.end(), dumped.begin(), dumped.end());
        }
        img = std::move(bufs.color);
    } else {
        if (!dump_dir.empty())
            throw std::runtime_error("--dump-buffers requires --mode hybrid");
        img = render_mode(mode, scene, cfg, workers, &report);
    }

    if (!out_png.empty()) {
        write_png_rgb8(out_png, img);
        report.outputs.push_back(out_png);
    }
    if (!out_pfm.empty()) {
        write_pfm(out_pfm, img);
        report.outputs.push_back(out_pfm);
    }
    std::cout << report.to_json() << "\n";
    return 0;
}

int run_compare(const std::string& a_spec, const std::string& b_spec,
                const std::string& scene_path, bool masked, const ConfigOverrides& overrides,
                int workers) {
    Scene scene;
    RenderConfig cfg;
    const bool need_scene = is_mode(a_spec) || is_mode(b_spec) || masked;
    if (need_scene) {
        if (scene_path.empty())
            throw std::runtime_error("compare: rendering a mode or masking needs --scene");
        std::tie(scene, cfg) = load_scene(scene_path);
        overrides.apply(cfg, scene);
    }

    auto resolve = [&](const std::string& spec) {
        return is_mode(spec) ? render_mode(spec, scene, cfg, workers, nullptr) : read_pfm(spec);
    };
    const Image a = resolve(a_spec);
    const Image b = resolve(b_spec);

    nlohmann::json j;
    j["mode_a"] = a_spec;
    j["mode_b"] = b_spec;
    j["psnr_full"] = psnr(a, b);
    j["psnr_masked"] = nullptr;
    j["mask_count"] = 0;
    if (masked) {
        const GBuffer g = rasterize(scene, cfg, workers);
        const BitMask mask = build_ray_mask(g, cfg);
        j["psnr_masked"] = psnr(a, b, &mask);
        j["mask_count"] = mask.count();
    }
    std::cout << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid motion-blur renderer"};
    app.require_subcommand(1);

    std::string scene_path, mode = "hybrid", out_png, out_pfm, dump_dir;
    std::string a_spec, b_spec, cmp_scene;
    bool masked = false;
    int workers = mblur::default_workers();

    CLI::App* render = app.add_subcommand("render", "Render a scene");
    render->add_option("--scene", scene_path, "Scene JSON")->required();
    render->add_option("--mode", mode, "Pipeline to run")
        ->check(CLI::IsMember({"hybrid", "baseline", "groundtruth"}));
    render->add_option("--out", out_png, "Output PNG path");
    render->add_option("--out-pfm", out_pfm, "Output PFM path");
    render->add_option("--dump-buffers", dump_dir, "Directory for intermediate buffers");
    render->add_option("--workers", workers, "Worker threads");
    ConfigOverrides render_cfg;
    render_cfg.attach(render);

    CLI::App* compare = app.add_subcommand("compare", "PSNR between two renders or PFM files");
    compare->add_option("--a", a_spec, "Mode name or PFM path")->required();
    compare->add_option("--b", b_spec, "Mode name or PFM path")->required();
    compare->add_option("--scene", cmp_scene, "Scene JSON (needed to render a mode)");
    compare->add_flag("--masked", masked, "Also report PSNR inside the ray mask");
    compare->add_option("--workers", workers, "Worker threads");
    ConfigOverrides compare_cfg;
    compare_cfg.attach(compare);

    CLI::App* dump = app.add_subcommand("dump-buffers", "Render hybrid and dump every buffer");
    std::string dump_scene, dump_out_dir;
    dump->add_option("--scene", dump_scene, "Scene JSON")->required();
    dump->add_option("--dir", dump_out_dir, "Output directory")->required();
    dump->add_option("--workers", workers, "Worker threads");
    ConfigOverrides dump_cfg;
    dump_cfg.attach(dump);

    CLI11_PARSE(app, argc, argv);

    try {
        if (render->parsed())
            return run_render(scene_path, mode, out_png, out_pfm, dump_dir, render_cfg, workers);
        if (compare->parsed())
            return run_compare(a_spec, b_spec, cmp_scene, masked, compare_cfg, workers);
        if (dump->parsed())
            return run_render(dump_scene, "hybrid", "", "", dump_out_dir, dump_cfg, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
