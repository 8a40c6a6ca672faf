#include "posekit/augmentation.hpp"

#include <algorithm>
#include <cmath>

namespace posekit {

Mat3 image_rotation(double theta, double width, double height) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double hx = 0.5 * width;
    const double hy = 0.5 * height;
    Mat3 m;
    m << c, -s, hx * (1.0 - c) + hy * s,
         s, c, hy * (1.0 - c) - hx * s,
         0.0, 0.0, 1.0;
    return m;
}

Pose relabel_pose(const Pose& pose, double theta) {
    const Mat3 rz = rot_z(theta);
    return {rz * pose.rotation, rz * pose.translation};
}

double conjugation_check(const CameraModel& cam, double theta) {
    Mat3 k;
    k << cam.fx, 0.0, cam.cx,
         0.0, cam.fy, cam.cy,
         0.0, 0.0, 1.0;
    // K is upper triangular; the analytic inverse avoids solver noise.
    Mat3 k_inv;
    k_inv << 1.0 / cam.fx, 0.0, -cam.cx / cam.fx,
             0.0, 1.0 / cam.fy, -cam.cy / cam.fy,
             0.0, 0.0, 1.0;
    const Mat3 conjugated = k_inv * image_rotation(theta, cam.width, cam.height) * k;
    return (conjugated - rot_z(theta)).cwiseAbs().maxCoeff();
}

BBox relabel_bbox(const BBox& box, double theta, const CameraModel& cam) {
    validate_bbox(box);
    const Mat3 m = image_rotation(theta, cam.width, cam.height);
    const double xs[2] = {box.x_min, box.x_max};
    const double ys[2] = {box.y_min, box.y_max};
    BBox hull{1e300, 1e300, -1e300, -1e300};
    for (double x : xs) {
        for (double y : ys) {
            const Vec3 p = m * Vec3(x, y, 1.0);
            hull.x_min = std::min(hull.x_min, p.x());
            hull.y_min = std::min(hull.y_min, p.y());
            hull.x_max = std::max(hull.x_max, p.x());
            hull.y_max = std::max(hull.y_max, p.y());
        }
    }
    BBox clipped{std::clamp(hull.x_min, 0.0, cam.width),
                 std::clamp(hull.y_min, 0.0, cam.height),
                 std::clamp(hull.x_max, 0.0, cam.width),
                 std::clamp(hull.y_max, 0.0, cam.height)};
    if (!clipped.valid())
        throw Error(ErrorKind::DegenerateBox, "rotated box hull collapses after clipping");
    return clipped;
}

BBox perturb_bbox(const BBox& box, const CameraModel& cam, Rng& rng, double frac) {
    validate_bbox(box);
    const double dx = frac * box.width();
    const double dy = frac * box.height();
    for (int attempt = 0; attempt < 10; ++attempt) {
        BBox candidate{box.x_min + rng.uniform(-dx, dx),
                       box.y_min + rng.uniform(-dy, dy),
                       box.x_max + rng.uniform(-dx, dx),
                       box.y_max + rng.uniform(-dy, dy)};
        candidate.x_min = std::clamp(candidate.x_min, 0.0, cam.width);
        candidate.x_max = std::clamp(candidate.x_max, 0.0, cam.width);
        candidate.y_min = std::clamp(candidate.y_min, 0.0, cam.height);
        candidate.y_max = std::clamp(candidate.y_max, 0.0, cam.height);
        if (candidate.valid()) return candidate;
    }
    throw Error(ErrorKind::DegenerateBox, "perturbation kept collapsing the box");
}

std::optional<double> sample_augmentation(const AugmentationPolicy& policy, Rng& rng) {
    if (rng.uniform() >= policy.apply_prob) return std::nullopt;
    if (rng.uniform() < policy.range_choice_prob)
        return rng.uniform(policy.minor_min, policy.minor_max);
    return rng.uniform(policy.major_min, policy.major_max);
}

}  // namespace posekit
