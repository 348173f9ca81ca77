#include "tempocont/geometry.hpp"

#include "tempocont/angular.hpp"
#include "tempocont/error.hpp"
#include "tempocont/text.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <string>

namespace tempocont {

namespace {

// Rays within this angle of the horizon are treated as missing the ground.
constexpr double kMinDescent = 1e-9;

} // namespace

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("camera: focal lengths must be positive");
    if (!rotation.allFinite() || !translation.allFinite()) throw InvalidArgument("camera: non-finite pose");
    if (((rotation * rotation.transpose()) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidArgument("camera: rotation is not orthonormal");
}

CameraModel CameraModel::nadir(double height, double yaw, double f, double cx, double cy) {
    CameraModel cam;
    cam.fx = cam.fy = f;
    cam.cx = cx;
    cam.cy = cy;
    Eigen::Matrix3d down;
    down << 1, 0, 0,
            0, -1, 0,
            0, 0, -1;
    cam.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix() * down;
    cam.translation = {0.0, 0.0, height};
    return cam;
}

CameraModel CameraModel::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double f, double cx,
                                 double cy) {
    const Eigen::Vector3d z = (target - eye).normalized();
    const Eigen::Vector3d side = z.cross(Eigen::Vector3d::UnitZ());
    if (side.norm() < 1e-12) throw InvalidArgument("look_at: viewing direction is vertical, use nadir()");
    const Eigen::Vector3d x = side.normalized();
    const Eigen::Vector3d y = z.cross(x);
    CameraModel cam;
    cam.fx = cam.fy = f;
    cam.cx = cx;
    cam.cy = cy;
    cam.rotation.col(0) = x;
    cam.rotation.col(1) = y;
    cam.rotation.col(2) = z;
    cam.translation = eye;
    return cam;
}

Eigen::Vector2d pixel_to_ground(const CameraModel& camera, const Eigen::Vector2d& pixel) {
    camera.validate();
    if (!(camera.translation.z() > 0.0)) throw InvalidArgument("pixel_to_ground: camera must be above the ground");
    if (!pixel.allFinite()) throw InvalidArgument("pixel_to_ground: non-finite pixel");
    const Eigen::Vector3d ray_cam((pixel.x() - camera.cx) / camera.fx, (pixel.y() - camera.cy) / camera.fy, 1.0);
    const Eigen::Vector3d ray = camera.rotation * ray_cam;
    if (ray.z() >= -kMinDescent * ray.norm())
        throw NoIntersection("pixel (" + text::format_double(pixel.x()) + ", " + text::format_double(pixel.y()) +
                             ") looks at or above the horizon");
    const double s = -camera.translation.z() / ray.z();
    return (camera.translation + s * ray).head<2>();
}

std::optional<Eigen::Vector2d> project(const CameraModel& camera, const Eigen::Vector3d& world) {
    const Eigen::Vector3d p = camera.rotation.transpose() * (world - camera.translation);
    if (!(p.z() > 0.0)) return std::nullopt;
    return Eigen::Vector2d(camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy);
}

Eigen::Vector2d bbox_foot_pixel(const BoundingBox& box) {
    if (!(box.u_min < box.u_max) || !(box.v_min < box.v_max))
        throw InvalidArgument("bbox_foot_pixel: degenerate or inverted box");
    return {0.5 * (box.u_min + box.u_max), box.v_max};
}

double image_heading_to_world(const CameraModel& camera, const Eigen::Vector2d& foot_pixel, double theta_img,
                              double epsilon) {
    if (!std::isfinite(theta_img)) throw InvalidArgument("image_heading_to_world: non-finite angle");
    if (!(epsilon > 0.0)) throw InvalidArgument("image_heading_to_world: epsilon must be positive");
    const Eigen::Vector2d p0 = pixel_to_ground(camera, foot_pixel);
    // Image y points down, so a positive angle moves the pixel up.
    const Eigen::Vector2d step(std::cos(theta_img), -std::sin(theta_img));
    const Eigen::Vector2d p1 = pixel_to_ground(camera, foot_pixel + epsilon * step);
    const Eigen::Vector2d d = p1 - p0;
    return decode({d.x(), d.y()});
}

ActorPose actor_pose(const CameraModel& camera, const BoundingBox& box, double theta_img) {
    const Eigen::Vector2d foot = bbox_foot_pixel(box);
    const Eigen::Vector2d ground = pixel_to_ground(camera, foot);
    return {ground.x(), ground.y(), image_heading_to_world(camera, foot, theta_img)};
}

CameraModel read_camera(std::istream& in) {
    std::map<std::string, double, std::less<>> values;
    std::map<std::string, std::size_t, std::less<>> seen_on;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = text::trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", number);
        const std::string key(text::trim(body.substr(0, eq)));
        if (seen_on.contains(key)) throw ParseError("duplicate key '" + key + "'", number);
        seen_on[key] = number;
        values[key] = text::parse_double(body.substr(eq + 1), number);
    }

    static const std::array<const char*, 16> keys = {"fx",  "fy",  "cx",  "cy",  "r00", "r01", "r02", "r10",
                                                     "r11", "r12", "r20", "r21", "r22", "tx",  "ty",  "tz"};
    for (const char* k : keys)
        if (!values.contains(k)) throw ParseError(std::string("camera file is missing '") + k + "'", 0);
    for (const auto& [k, line_no] : seen_on) {
        bool known = false;
        for (const char* expected : keys) known = known || k == expected;
        if (!known) throw ParseError("unknown camera key '" + k + "'", line_no);
    }

    CameraModel cam;
    cam.fx = values["fx"];
    cam.fy = values["fy"];
    cam.cx = values["cx"];
    cam.cy = values["cy"];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cam.rotation(r, c) = values["r" + std::to_string(r) + std::to_string(c)];
    cam.translation = {values["tx"], values["ty"], values["tz"]};
    try {
        cam.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), 0);
    }
    return cam;
}

CameraModel load_camera(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera file '" + path.string() + "'");
    return read_camera(in);
}

} // namespace tempocont
