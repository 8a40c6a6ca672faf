#include "posekit/crop_targets.hpp"

namespace posekit {

void validate_bbox(const BBox& box) {
    if (!box.valid())
        throw Error(ErrorKind::DegenerateBox, "box sides must exceed 1 px");
}

CropScales crop_scales(const CameraModel& cam, const BBox& box) {
    validate_bbox(box);
    return {cam.width / (cam.alpha * box.width()), cam.height / box.height()};
}

double encode_depth(double z, const CropScales& scales) {
    if (!(z > 0.0))
        throw Error(ErrorKind::NonPositiveDepth, "depth must be positive");
    return 0.5 * (1.0 / scales.sx + 1.0 / scales.sy) * z;
}

double decode_depth(double uz, const CropScales& scales) {
    if (!(uz > 0.0))
        throw Error(ErrorKind::NonPositiveDepth, "depth proxy must be positive");
    return 2.0 * uz / (1.0 / scales.sx + 1.0 / scales.sy);
}

std::pair<double, double> encode_lateral(const Vec3& t, const CameraModel& cam, const BBox& box) {
    validate_bbox(box);
    const Eigen::Vector2d pixel = project(cam, t);
    return {(pixel.x() - box.center_x()) / box.width(),
            (pixel.y() - box.center_y()) / box.height()};
}

std::pair<double, double> decode_lateral(double ux, double uy, double z,
                                         const CameraModel& cam, const BBox& box) {
    if (!(z > 0.0))
        throw Error(ErrorKind::NonPositiveDepth, "depth must be positive");
    return {(box.center_x() + ux * box.width() - cam.cx) * z / cam.fx,
            (box.center_y() + uy * box.height() - cam.cy) * z / cam.fy};
}

TargetVector encode_pose(const Pose& pose, const CameraModel& cam, const BBox& box) {
    const CropScales scales = crop_scales(cam, box);
    TargetVector out;
    out.uz = encode_depth(pose.translation.z(), scales);
    std::tie(out.ux, out.uy) = encode_lateral(pose.translation, cam, box);
    const Mat3 apparent = to_apparent(pose.rotation, pose.translation);
    out.six = {apparent.col(0), apparent.col(1)};
    return out;
}

Pose decode_pose(const TargetVector& t, const CameraModel& cam, const BBox& box) {
    const CropScales scales = crop_scales(cam, box);
    const double z = decode_depth(t.uz, scales);
    const auto [x, y] = decode_lateral(t.ux, t.uy, z, cam, box);
    Pose pose;
    pose.translation = Vec3(x, y, z);
    pose.rotation = from_apparent(gram_schmidt(t.six), pose.translation);
    return pose;
}

}  // namespace posekit
