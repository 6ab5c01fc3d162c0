#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mblur/vec.h"

namespace mblur {

struct Mat3 {
    // row-major
    double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const;

    static Mat3 rotation_x(double a);
    static Mat3 rotation_y(double a);
    static Mat3 rotation_z(double a);
    // Euler XYZ order: rotate about x, then y, then z.
    static Mat3 rotation_xyz(const Vec3& euler);
};

/// Rigid pose plus per-axis scale. Euler angles are radians, XYZ order.
struct Transform {
    Vec3 translation{0, 0, 0};
    Vec3 rotation{0, 0, 0};
    Vec3 scale{1, 1, 1};

    bool operator==(const Transform& o) const {
        return translation == o.translation && rotation == o.rotation && scale == o.scale;
    }
};

/// Transform with the rotation matrix baked, for transforming many vertices.
struct PosedTransform {
    Mat3 rot;
    Vec3 scale;
    Vec3 translation;

    explicit PosedTransform(const Transform& t)
        : rot(Mat3::rotation_xyz(t.rotation)), scale(t.scale), translation(t.translation) {}

    Vec3 point(const Vec3& p) const {
        return rot * Vec3{p.x * scale.x, p.y * scale.y, p.z * scale.z} + translation;
    }
    // Normals transform by the inverse-transpose of the linear part; with
    // R * diag(s) that is R * diag(1/s) up to normalization.
    Vec3 normal(const Vec3& n) const {
        return normalize(rot * Vec3{n.x / scale.x, n.y / scale.y, n.z / scale.z});
    }
};

struct Triangle {
    Vec3 pos[3];   // object space
    Vec3 nrm[3];   // object space, unit length
};

struct Material {
    Color albedo{0.8, 0.8, 0.8};   // linear RGB in [0,1]
    Color emissive{0, 0, 0};       // linear RGB >= 0
};

struct Light {
    enum class Kind { directional, point };
    Kind kind = Kind::directional;
    Vec3 vec{0, 0, 1};   // propagation direction (directional) or position (point)
    Color intensity{1, 1, 1};
};

struct Camera {
    Vec3 position{0, 0, 0};
    Vec3 look_at{0, 0, 1};
    Vec3 up{0, 1, 0};
    double vfov = 1.0;   // radians, full vertical field of view
    int width = 512;
    int height = 512;
};

/// Orthonormal view basis plus the pixel focal length, derived from a Camera.
struct CameraFrame {
    Vec3 origin;
    Vec3 right, upv, forward;
    double f_px;   // (H/2) / tan(vfov/2)
    double half_w, half_h;

    explicit CameraFrame(const Camera& cam);
};

struct MeshInstance {
    int mesh_id = 0;   // >= 1, unique per scene
    std::vector<Triangle> triangles;
    Material material;
    Transform pose_open;    // shutter open, t = 0
    Transform pose_close;   // shutter close, t = 1

    bool is_static() const { return pose_open == pose_close; }
};

struct Scene {
    std::vector<MeshInstance> instances;
    std::vector<Light> lights;
    Camera camera;
    Color environment_color{0, 0, 0};
    Color ambient{0, 0, 0};
};

enum class IdMode { luminance, mesh };

/// Every tunable threshold in the pipeline. Fields absent from a scene file
/// take these defaults; depth_scale and z_extent have scene-derived defaults
/// resolved at load time.
struct RenderConfig {
    int sample_count = 15;          // gather samples per pixel (odd, >= 3)
    int tile_size = 20;             // tile edge in pixels; also the velocity clamp
    double min_speed = 0.5;         // pixels; below this a pixel counts as static
    double depth_delta_rel = 0.1;   // relative depth gap for the displacement test
    double depth_delta_abs = 0.01;  // absolute depth gap, scene units
    double sobel_threshold = 1.0;   // edge response cut
    double depth_scale = 0.0;       // depth normalization for Sobel; 0 = derive from scene
    int range_check_max = 32;       // max samples along the displacement
    int max_recursion = 4;          // ray advances after the first hit
    double luminance_tol = 0.05;    // termination tolerance in luminance mode
    double ray_epsilon = 1e-3;      // advance offset, scene units
    double z_extent = 0.0;          // soft depth window; 0 = 0.1 * depth_scale
    IdMode id_mode = IdMode::luminance;
    int ground_truth_time_samples = 64;

    // Fills depth_scale / z_extent from the scene when not set explicitly
    // and checks all invariants; throws std::runtime_error on violation.
    void resolve(const Scene& scene);
    void validate() const;
};

struct Projected {
    Vec2 screen;    // pixels; (0,0) = top-left corner of the top-left pixel
    double depth;   // camera-space distance along the view axis
};

/// Loads a scene plus config from a JSON file (see README for the schema).
/// Throws std::runtime_error with the offending path and field on any
/// parse or validation failure.
std::pair<Scene, RenderConfig> load_scene(const std::string& path);

/// Componentwise linear interpolation between the shutter poses. t in [0,1].
Transform pose_at(const MeshInstance& inst, double t);

/// Pinhole projection. Empty when the point is at or behind the camera
/// plane (depth <= 1e-6).
std::optional<Projected> project(const Camera& cam, const Vec3& p_world);
std::optional<Projected> project(const CameraFrame& frame, const Vec3& p_world);

/// Inverse of project for an on-screen position and positive depth.
Vec3 unproject(const Camera& cam, const Vec2& screen, double depth);

/// Diameter of a sphere bounding all instance geometry at both shutter
/// poses; 1.0 for an empty scene. Default source for depth_scale.
double scene_bounding_diameter(const Scene& scene);

/// Ray direction through the center of pixel (px, py), unit length.
Vec3 pixel_ray_direction(const CameraFrame& frame, int px, int py);

/// Canonical primitives in object space, as the scene loader builds them;
/// also handy for constructing scenes in code. The quad is the unit square
/// in the XY plane facing -Z; the box is the unit cube; the checker plane
/// is the unit quad with only cells of one parity filled in.
std::vector<Triangle> make_quad();
std::vector<Triangle> make_box();
std::vector<Triangle> make_checker_plane(int cells_x, int cells_y, int phase = 0);

}  // namespace mblur
