#pragma once

#include <string>
#include <vector>

#include "mblur/gbuffer.h"
#include "mblur/oracle.h"
#include "mblur/postprocess.h"
#include "mblur/raymask.h"
#include "mblur/rayreveal.h"
#include "mblur/scene.h"

namespace mblur {

/// Wall-clock pass times plus the ray budget actually spent. Everything here
/// is diagnostic; image output never depends on it.
struct RunReport {
    double raster_ms = 0.0;
    double mask_ms = 0.0;
    double accel_build_ms = 0.0;
    double reveal_ms = 0.0;
    double tile_ms = 0.0;
    double filter_raster_ms = 0.0;
    double filter_bg_ms = 0.0;
    double composite_ms = 0.0;
    double total_ms = 0.0;
    uint64_t masked_pixels = 0;
    uint64_t rays_cast = 0;
    std::vector<std::string> outputs;

    std::string to_json() const;  // single line
};

/// Every buffer the hybrid pipeline produces, kept so callers can dump or
/// inspect any stage.
struct HybridBuffers {
    GBuffer g;
    BitMask mask_candidate;
    BitMask mask_edge;
    BitMask mask_ray;
    BackgroundBuffer bg;
    BlurLayer raster_blur;
    BlurLayer bg_blur;
    Image color;
    RunReport report;
};

/// Full hybrid pipeline: rasterize, three-stage mask, BVH build, ray reveal,
/// tile dilation for both layers, gather blur for both layers, composite.
/// Invalid background pixels borrow the raster planes before the background
/// blur, and the background layer is dilated from its own velocities.
HybridBuffers render_hybrid(const Scene& scene, const RenderConfig& cfg, int workers = 1);

/// 0/255 grayscale view of a mask, for PNG dumps.
Plane<uint8_t> mask_to_gray(const BitMask& mask);

/// Writes every intermediate plus the final image into dir (created if
/// missing) and returns the paths written.
std::vector<std::string> dump_buffers(const HybridBuffers& bufs, const std::string& dir);

}  // namespace mblur
