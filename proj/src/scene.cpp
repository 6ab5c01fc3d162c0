#include "mblur/scene.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mblur {

using nlohmann::json;
namespace fs = std::filesystem;

Mat3 Mat3::operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
            r.m[i * 3 + j] = s;
        }
    return r;
}

Mat3 Mat3::rotation_x(double a) {
    double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    double v[9] = {1, 0, 0, 0, c, -s, 0, s, c};
    std::copy(v, v + 9, r.m);
    return r;
}

Mat3 Mat3::rotation_y(double a) {
    double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    double v[9] = {c, 0, s, 0, 1, 0, -s, 0, c};
    std::copy(v, v + 9, r.m);
    return r;
}

Mat3 Mat3::rotation_z(double a) {
    double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    double v[9] = {c, -s, 0, s, c, 0, 0, 0, 1};
    std::copy(v, v + 9, r.m);
    return r;
}

Mat3 Mat3::rotation_xyz(const Vec3& e) {
    return rotation_z(e.z) * rotation_y(e.y) * rotation_x(e.x);
}

CameraFrame::CameraFrame(const Camera& cam) {
    origin = cam.position;
    forward = normalize(cam.look_at - cam.position);
    right = normalize(cross(forward, cam.up));
    upv = cross(right, forward);
    f_px = (cam.height * 0.5) / std::tan(cam.vfov * 0.5);
    half_w = cam.width * 0.5;
    half_h = cam.height * 0.5;
}

Transform pose_at(const MeshInstance& inst, double t) {
    assert(t >= 0.0 && t <= 1.0);
    Transform out;
    out.translation = lerp(inst.pose_open.translation, inst.pose_close.translation, t);
    out.rotation = lerp(inst.pose_open.rotation, inst.pose_close.rotation, t);
    out.scale = lerp(inst.pose_open.scale, inst.pose_close.scale, t);
    return out;
}

std::optional<Projected> project(const CameraFrame& fr, const Vec3& p_world) {
    Vec3 q = p_world - fr.origin;
    double z = dot(q, fr.forward);
    if (z <= 1e-6) return std::nullopt;
    double x = dot(q, fr.right);
    double y = dot(q, fr.upv);
    Projected out;
    out.screen = {fr.half_w + fr.f_px * x / z, fr.half_h - fr.f_px * y / z};
    out.depth = z;
    return out;
}

std::optional<Projected> project(const Camera& cam, const Vec3& p_world) {
    return project(CameraFrame(cam), p_world);
}

Vec3 unproject(const Camera& cam, const Vec2& screen, double depth) {
    CameraFrame fr(cam);
    double dx = (screen.x - fr.half_w) / fr.f_px;
    double dy = (fr.half_h - screen.y) / fr.f_px;
    return fr.origin + depth * (fr.right * dx + fr.upv * dy + fr.forward);
}

Vec3 pixel_ray_direction(const CameraFrame& fr, int px, int py) {
    double dx = (px + 0.5 - fr.half_w) / fr.f_px;
    double dy = (fr.half_h - (py + 0.5)) / fr.f_px;
    return normalize(fr.right * dx + fr.upv * dy + fr.forward);
}

double scene_bounding_diameter(const Scene& scene) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec3 lo{inf, inf, inf}, hi{-inf, -inf, -inf};
    bool any = false;
    for (const auto& inst : scene.instances) {
        for (const Transform& pose : {inst.pose_open, inst.pose_close}) {
            PosedTransform pt(pose);
            for (const auto& tri : inst.triangles)
                for (const auto& p : tri.pos) {
                    Vec3 w = pt.point(p);
                    lo = min3(lo, w);
                    hi = max3(hi, w);
                    any = true;
                }
        }
    }
    if (!any) return 1.0;
    return (hi - lo).length();
}

void RenderConfig::resolve(const Scene& scene) {
    if (depth_scale <= 0.0) depth_scale = scene_bounding_diameter(scene);
    if (z_extent <= 0.0) z_extent = 0.1 * depth_scale;
    validate();
}

void RenderConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::runtime_error("config: " + msg); };
    if (sample_count < 3) fail("sample_count must be >= 3");
    if (sample_count % 2 == 0) fail("sample_count must be odd");
    if (tile_size < 1) fail("tile_size must be >= 1");
    if (!(min_speed > 0)) fail("min_speed must be positive");
    if (!(depth_delta_rel > 0)) fail("depth_delta_rel must be positive");
    if (!(depth_delta_abs > 0)) fail("depth_delta_abs must be positive");
    if (!(sobel_threshold > 0)) fail("sobel_threshold must be positive");
    if (!(depth_scale > 0)) fail("depth_scale must be positive");
    if (range_check_max < 1) fail("range_check_max must be >= 1");
    if (max_recursion < 1) fail("max_recursion must be >= 1");
    if (!(luminance_tol > 0)) fail("luminance_tol must be positive");
    if (!(ray_epsilon > 0)) fail("ray_epsilon must be positive");
    if (!(z_extent > 0)) fail("z_extent must be positive");
    if (ground_truth_time_samples < 1) fail("ground_truth_time_samples must be >= 1");
}

namespace {

// Helper for built-in planar primitives: a rectangle in the XY plane facing
// -Z (toward a camera at the origin looking down +Z).
void append_quad(std::vector<Triangle>& out, double x0, double y0, double x1, double y1) {
    Vec3 n{0, 0, -1};
    Vec3 a{x0, y0, 0}, b{x1, y0, 0}, c{x1, y1, 0}, d{x0, y1, 0};
    out.push_back({{a, c, b}, {n, n, n}});
    out.push_back({{a, d, c}, {n, n, n}});
}

}  // namespace

std::vector<Triangle> make_quad() {
    std::vector<Triangle> out;
    append_quad(out, -0.5, -0.5, 0.5, 0.5);
    return out;
}

std::vector<Triangle> make_box() {
    std::vector<Triangle> out;
    auto face = [&](Vec3 o, Vec3 u, Vec3 v, Vec3 n) {
        Vec3 a = o, b = o + u, c = o + u + v, d = o + v;
        out.push_back({{a, b, c}, {n, n, n}});
        out.push_back({{a, c, d}, {n, n, n}});
    };
    double h = 0.5;
    face({-h, -h, -h}, {0, 2 * h, 0}, {2 * h, 0, 0}, {0, 0, -1});   // front (-Z)
    face({-h, -h, h}, {2 * h, 0, 0}, {0, 2 * h, 0}, {0, 0, 1});     // back (+Z)
    face({-h, -h, -h}, {0, 0, 2 * h}, {0, 2 * h, 0}, {-1, 0, 0});   // left
    face({h, -h, -h}, {0, 2 * h, 0}, {0, 0, 2 * h}, {1, 0, 0});     // right
    face({-h, h, -h}, {0, 0, 2 * h}, {2 * h, 0, 0}, {0, 1, 0});     // top
    face({-h, -h, -h}, {2 * h, 0, 0}, {0, 0, 2 * h}, {0, -1, 0});   // bottom
    return out;
}

std::vector<Triangle> make_checker_plane(int cells_x, int cells_y, int phase) {
    std::vector<Triangle> out;
    // Only cells with (i + j + phase) even get geometry, so one instance
    // over a backing quad (or two instances of opposite phase) forms a
    // checkerboard with a distinct mesh id per color.
    for (int j = 0; j < cells_y; ++j)
        for (int i = 0; i < cells_x; ++i) {
            if ((i + j + phase) % 2 != 0) continue;
            double x0 = -0.5 + static_cast<double>(i) / cells_x;
            double x1 = -0.5 + static_cast<double>(i + 1) / cells_x;
            double y0 = -0.5 + static_cast<double>(j) / cells_y;
            double y1 = -0.5 + static_cast<double>(j + 1) / cells_y;
            append_quad(out, x0, y0, x1, y1);
        }
    return out;
}

namespace {

// ---- scene file parsing -------------------------------------------------

struct LoadContext {
    std::string file;
    fs::path dir;

    [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
        throw std::runtime_error(file + ": " + field + ": " + msg);
    }
};

double get_number(const LoadContext& ctx, const json& j, const std::string& field) {
    if (!j.is_number()) ctx.fail(field, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) ctx.fail(field, "non-finite value");
    return v;
}

Vec3 get_vec3(const LoadContext& ctx, const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) ctx.fail(field, "expected an array of 3 numbers");
    return {get_number(ctx, j[0], field + "[0]"), get_number(ctx, j[1], field + "[1]"),
            get_number(ctx, j[2], field + "[2]")};
}

Vec3 get_vec3_or(const LoadContext& ctx, const json& j, const std::string& key,
                 const std::string& field, const Vec3& def) {
    if (!j.contains(key)) return def;
    return get_vec3(ctx, j.at(key), field);
}

Transform parse_transform(const LoadContext& ctx, const json& j, const std::string& field) {
    Transform t;
    t.translation = get_vec3_or(ctx, j, "translation", field + ".translation", {0, 0, 0});
    t.rotation = get_vec3_or(ctx, j, "rotation", field + ".rotation", {0, 0, 0});
    t.scale = get_vec3_or(ctx, j, "scale", field + ".scale", {1, 1, 1});
    if (!(t.scale.x > 0 && t.scale.y > 0 && t.scale.z > 0))
        ctx.fail(field + ".scale", "scale components must be positive");
    return t;
}

std::vector<Triangle> load_obj(const LoadContext& ctx, const fs::path& path,
                               const std::string& field) {
    std::ifstream in(path);
    if (!in) ctx.fail(field, "mesh file not found: " + path.string());

    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<Triangle> tris;

    auto check_finite = [&](const Vec3& v, int line) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
            ctx.fail(field, "non-finite value in " + path.string() + " line " +
                                std::to_string(line));
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v;
            ls >> v.x >> v.y >> v.z;
            check_finite(v, line_no);
            positions.push_back(v);
        } else if (tag == "vn") {
            Vec3 v;
            ls >> v.x >> v.y >> v.z;
            check_finite(v, line_no);
            normals.push_back(v);
        } else if (tag == "f") {
            struct Corner {
                int pos = 0, nrm = 0;
            };
            std::vector<Corner> corners;
            std::string tok;
            while (ls >> tok) {
                Corner c;
                size_t s1 = tok.find('/');
                c.pos = std::stoi(tok.substr(0, s1));
                if (s1 != std::string::npos) {
                    size_t s2 = tok.find('/', s1 + 1);
                    if (s2 != std::string::npos && s2 + 1 < tok.size())
                        c.nrm = std::stoi(tok.substr(s2 + 1));
                }
                if (c.pos < 1 || c.pos > static_cast<int>(positions.size()))
                    ctx.fail(field, "face index out of range in " + path.string() +
                                        " line " + std::to_string(line_no));
                if (c.nrm < 0 || c.nrm > static_cast<int>(normals.size()))
                    ctx.fail(field, "normal index out of range in " + path.string() +
                                        " line " + std::to_string(line_no));
                corners.push_back(c);
            }
            if (corners.size() < 3)
                ctx.fail(field, "face with fewer than 3 vertices in " + path.string());
            for (size_t k = 2; k < corners.size(); ++k) {
                Triangle t;
                const Corner cs[3] = {corners[0], corners[k - 1], corners[k]};
                Vec3 face_n = normalize(cross(positions[cs[1].pos - 1] - positions[cs[0].pos - 1],
                                              positions[cs[2].pos - 1] - positions[cs[0].pos - 1]));
                for (int i = 0; i < 3; ++i) {
                    t.pos[i] = positions[cs[i].pos - 1];
                    t.nrm[i] = cs[i].nrm > 0 ? normalize(normals[cs[i].nrm - 1]) : face_n;
                }
                tris.push_back(t);
            }
        }
        // other tags (vt, usemtl, ...) are ignored
    }
    if (tris.empty()) ctx.fail(field, "no faces in " + path.string());
    return tris;
}

Material parse_material(const LoadContext& ctx, const json& j, const std::string& field) {
    Material m;
    if (j.contains("albedo")) m.albedo = get_vec3(ctx, j.at("albedo"), field + ".albedo");
    if (j.contains("emissive")) m.emissive = get_vec3(ctx, j.at("emissive"), field + ".emissive");
    for (double c : {m.albedo.x, m.albedo.y, m.albedo.z})
        if (c < 0.0 || c > 1.0) ctx.fail(field + ".albedo", "components must be in [0,1]");
    for (double c : {m.emissive.x, m.emissive.y, m.emissive.z})
        if (c < 0.0) ctx.fail(field + ".emissive", "components must be >= 0");
    return m;
}

MeshInstance parse_instance(const LoadContext& ctx, const json& j, size_t index) {
    std::string field = "instances[" + std::to_string(index) + "]";
    MeshInstance inst;
    if (!j.contains("mesh_id")) ctx.fail(field, "missing mesh_id");
    if (!j.at("mesh_id").is_number_integer() || j.at("mesh_id").get<int>() < 1)
        ctx.fail(field + ".mesh_id", "must be an integer >= 1");
    inst.mesh_id = j.at("mesh_id").get<int>();

    if (!j.contains("primitive")) ctx.fail(field, "missing primitive");
    const json& prim = j.at("primitive");
    if (prim.is_string()) {
        std::string name = prim.get<std::string>();
        if (name == "quad") {
            inst.triangles = make_quad();
        } else if (name == "box") {
            inst.triangles = make_box();
        } else if (name == "checker_plane") {
            int cx = 8, cy = 8, phase = 0;
            if (j.contains("cells")) {
                const json& c = j.at("cells");
                if (!c.is_array() || c.size() != 2) ctx.fail(field + ".cells", "expected [nx, ny]");
                cx = c[0].get<int>();
                cy = c[1].get<int>();
                if (cx < 1 || cy < 1) ctx.fail(field + ".cells", "cell counts must be >= 1");
            }
            if (j.contains("phase")) phase = j.at("phase").get<int>() & 1;
            inst.triangles = make_checker_plane(cx, cy, phase);
        } else {
            ctx.fail(field + ".primitive", "unknown primitive '" + name + "'");
        }
    } else if (prim.is_object() && prim.contains("obj")) {
        fs::path p = prim.at("obj").get<std::string>();
        if (p.is_relative()) p = ctx.dir / p;
        inst.triangles = load_obj(ctx, p, field + ".primitive.obj");
    } else {
        ctx.fail(field + ".primitive", "expected \"quad\", \"box\", \"checker_plane\", or {\"obj\": path}");
    }

    if (j.contains("material"))
        inst.material = parse_material(ctx, j.at("material"), field + ".material");
    if (j.contains("pose_open"))
        inst.pose_open = parse_transform(ctx, j.at("pose_open"), field + ".pose_open");
    inst.pose_close =
        j.contains("pose_close") ? parse_transform(ctx, j.at("pose_close"), field + ".pose_close")
                                 : inst.pose_open;

    for (const auto& tri : inst.triangles)
        for (const auto& n : tri.nrm)
            if (std::abs(n.length() - 1.0) > 1e-4)
                ctx.fail(field, "vertex normal not unit length");
    return inst;
}

Light parse_light(const LoadContext& ctx, const json& j, size_t index) {
    std::string field = "lights[" + std::to_string(index) + "]";
    Light l;
    std::string kind = j.value("kind", "directional");
    if (kind == "directional") {
        l.kind = Light::Kind::directional;
        if (!j.contains("direction")) ctx.fail(field, "directional light missing direction");
        l.vec = get_vec3(ctx, j.at("direction"), field + ".direction");
        double len = l.vec.length();
        if (std::abs(len - 1.0) > 1e-3) {
            if (len <= 0) ctx.fail(field + ".direction", "zero direction");
            l.vec = l.vec / len;
        }
    } else if (kind == "point") {
        l.kind = Light::Kind::point;
        if (!j.contains("position")) ctx.fail(field, "point light missing position");
        l.vec = get_vec3(ctx, j.at("position"), field + ".position");
    } else {
        ctx.fail(field + ".kind", "expected \"directional\" or \"point\"");
    }
    if (j.contains("intensity")) l.intensity = get_vec3(ctx, j.at("intensity"), field + ".intensity");
    for (double c : {l.intensity.x, l.intensity.y, l.intensity.z})
        if (c < 0.0) ctx.fail(field + ".intensity", "components must be >= 0");
    return l;
}

void parse_config(const LoadContext& ctx, const json& j, RenderConfig& cfg) {
    auto num = [&](const char* key, double& out) {
        if (j.contains(key)) out = get_number(ctx, j.at(key), std::string("config.") + key);
    };
    auto integer = [&](const char* key, int& out) {
        if (j.contains(key)) {
            double v = get_number(ctx, j.at(key), std::string("config.") + key);
            out = static_cast<int>(v);
        }
    };
    integer("sample_count", cfg.sample_count);
    integer("tile_size", cfg.tile_size);
    num("min_speed", cfg.min_speed);
    num("depth_delta_rel", cfg.depth_delta_rel);
    num("depth_delta_abs", cfg.depth_delta_abs);
    num("sobel_threshold", cfg.sobel_threshold);
    num("depth_scale", cfg.depth_scale);
    integer("range_check_max", cfg.range_check_max);
    integer("max_recursion", cfg.max_recursion);
    num("luminance_tol", cfg.luminance_tol);
    num("ray_epsilon", cfg.ray_epsilon);
    num("z_extent", cfg.z_extent);
    integer("ground_truth_time_samples", cfg.ground_truth_time_samples);
    if (j.contains("id_mode")) {
        std::string mode = j.at("id_mode").get<std::string>();
        if (mode == "luminance")
            cfg.id_mode = IdMode::luminance;
        else if (mode == "mesh")
            cfg.id_mode = IdMode::mesh;
        else
            ctx.fail("config.id_mode", "expected \"luminance\" or \"mesh\"");
    }
}

}  // namespace

std::pair<Scene, RenderConfig> load_scene(const std::string& path) {
    LoadContext ctx;
    ctx.file = path;
    ctx.dir = fs::path(path).parent_path();

    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open scene file");

    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": parse failure: " + e.what());
    }

    Scene scene;
    RenderConfig cfg;

    if (!root.contains("camera")) ctx.fail("camera", "missing");
    const json& jc = root.at("camera");
    scene.camera.position = get_vec3(ctx, jc.at("position"), "camera.position");
    scene.camera.look_at = get_vec3(ctx, jc.at("look_at"), "camera.look_at");
    scene.camera.up = get_vec3_or(ctx, jc, "up", "camera.up", {0, 1, 0});
    double vfov_deg = get_number(ctx, jc.at("vfov_deg"), "camera.vfov_deg");
    if (vfov_deg <= 0.0 || vfov_deg >= 180.0) ctx.fail("camera.vfov_deg", "must be in (0, 180)");
    scene.camera.vfov = vfov_deg * (M_PI / 180.0);
    scene.camera.width = jc.at("width").get<int>();
    scene.camera.height = jc.at("height").get<int>();
    if (scene.camera.width < 8 || scene.camera.height < 8)
        ctx.fail("camera.width/height", "resolution must be at least 8x8");
    Vec3 view = scene.camera.look_at - scene.camera.position;
    if (cross(view, scene.camera.up).length() < 1e-9 * view.length() * scene.camera.up.length())
        ctx.fail("camera.up", "parallel to the view direction");

    scene.environment_color =
        get_vec3_or(ctx, root, "environment_color", "environment_color", {0, 0, 0});
    scene.ambient = get_vec3_or(ctx, root, "ambient", "ambient", {0, 0, 0});

    if (root.contains("lights")) {
        const json& jl = root.at("lights");
        if (!jl.is_array()) ctx.fail("lights", "expected an array");
        for (size_t i = 0; i < jl.size(); ++i) scene.lights.push_back(parse_light(ctx, jl[i], i));
    }

    if (root.contains("instances")) {
        const json& ji = root.at("instances");
        if (!ji.is_array()) ctx.fail("instances", "expected an array");
        std::set<int> seen;
        for (size_t i = 0; i < ji.size(); ++i) {
            MeshInstance inst = parse_instance(ctx, ji[i], i);
            if (!seen.insert(inst.mesh_id).second)
                ctx.fail("instances[" + std::to_string(i) + "].mesh_id",
                         "duplicate mesh_id " + std::to_string(inst.mesh_id));
            scene.instances.push_back(std::move(inst));
        }
    }

    if (root.contains("config")) parse_config(ctx, root.at("config"), cfg);

    try {
        cfg.resolve(scene);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return {std::move(scene), cfg};
}

}  // namespace mblur
