#pragma once

#include <set>

#include "mblur/gbuffer.h"
#include "mblur/raymask.h"
#include "mblur/scene.h"

namespace mblur {

using Image = Plane<Vec3>;

/// Distributed ray tracing reference: per pixel, the mean of full primary
/// shades with geometry posed at stratified shutter midpoints
/// t_j = (j + 0.5) / N_t over the unit exposure. Deterministic — the shutter
/// times carry no jitter.
Image ground_truth(const Scene& scene, const RenderConfig& cfg, int workers = 1);

/// Post-process-only pipeline: rasterize, tile-dilate, gather blur on the
/// raster layer, and return its color directly — no mask, no rays, no
/// composite.
Image baseline(const Scene& scene, const RenderConfig& cfg, int workers = 1);

/// Rasterizes the scene with the listed mesh ids removed — the ground truth
/// for what a reveal pass should find behind them. Throws std::runtime_error
/// for ids the scene does not contain.
GBuffer background_oracle(const Scene& scene, const std::set<int>& exclude_ids,
                          const RenderConfig& cfg, int workers = 1);

/// 10*log10(1/MSE) over linear RGB clamped to [0,1], averaged over channels
/// and pixels (or the masked subset), capped at 99.0. Throws on dimension
/// mismatch or an empty mask.
double psnr(const Image& a, const Image& b, const BitMask* mask = nullptr);

}  // namespace mblur
