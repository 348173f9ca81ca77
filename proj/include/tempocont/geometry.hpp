#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace tempocont {

/// Pinhole camera over the ground plane z = 0. Camera frame: +z along the
/// optical axis, +x right, +y down in the image. `rotation` maps camera
/// directions to world directions; `translation` is the camera center.
struct CameraModel {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    void validate() const;

    /// Looking straight down from `height`, image +x along world
    /// (cos yaw, sin yaw).
    static CameraModel nadir(double height, double yaw, double f, double cx, double cy);

    /// Optical axis through `target`; image x is horizontal (world up is +z).
    static CameraModel look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double f, double cx,
                               double cy);
};

struct ActorPose {
    double x = 0.0;
    double y = 0.0;
    double theta_w = 0.0;  // (-pi, pi]
};

struct BoundingBox {
    double u_min = 0.0;
    double v_min = 0.0;
    double u_max = 0.0;
    double v_max = 0.0;
};

/// Intersection of the pixel's back-projected ray with z = 0.
/// Throws NoIntersection when the ray is parallel to or leaves the plane.
Eigen::Vector2d pixel_to_ground(const CameraModel& camera, const Eigen::Vector2d& pixel);

/// Pinhole projection of a world point; empty when behind the camera.
std::optional<Eigen::Vector2d> project(const CameraModel& camera, const Eigen::Vector3d& world);

/// Bottom center of the box: ((u_min + u_max) / 2, v_max).
Eigen::Vector2d bbox_foot_pixel(const BoundingBox& box);

/// World heading of an image-space heading at `foot_pixel`, from the ground
/// displacement between the foot pixel and the pixel `epsilon` away along
/// (cos theta_img, -sin theta_img).
double image_heading_to_world(const CameraModel& camera, const Eigen::Vector2d& foot_pixel, double theta_img,
                              double epsilon = 1.0);

ActorPose actor_pose(const CameraModel& camera, const BoundingBox& box, double theta_img);

/// Flat key=value camera description: fx fy cx cy r00..r22 tx ty tz.
/// '#' starts a comment.
CameraModel read_camera(std::istream& in);
CameraModel load_camera(const std::filesystem::path& path);

} // namespace tempocont
