#pragma once

#include <utility>

#include "posekit/geometry.hpp"

namespace posekit {

// Boxes thinner than this (in pixels) are degenerate.
inline constexpr double kBoxEps = 1.0;

// Axis-aligned pixel rectangle with continuous coordinates.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }
    bool valid() const { return width() > kBoxEps && height() > kBoxEps; }
};

// Zoom factors relating the crop to the full image.
struct CropScales {
    double sx = 1.0;
    double sy = 1.0;
};

// Crop-normalized regression targets: lateral offsets (dimensionless),
// depth proxy uz (carries meters; the scales are dimensionless), and the
// two apparent-rotation columns.
struct TargetVector {
    double ux = 0.0;
    double uy = 0.0;
    double uz = 0.0;
    SixDRotation six{Vec3::UnitX(), Vec3::UnitY()};
};

// Throws DegenerateBox unless box.valid().
void validate_bbox(const BBox& box);

// sx = W / (alpha * w), sy = H / h.
CropScales crop_scales(const CameraModel& cam, const BBox& box);

// uz = (1/sx + 1/sy) / 2 * z. Throws NonPositiveDepth when z <= 0.
double encode_depth(double z, const CropScales& scales);

// Inverse of encode_depth. Throws NonPositiveDepth when uz <= 0.
double decode_depth(double uz, const CropScales& scales);

// Offsets of the projected object center from the box center, normalized
// by crop width and height.
std::pair<double, double> encode_lateral(const Vec3& t, const CameraModel& cam, const BBox& box);

// Inverse of encode_lateral given the recovered depth.
std::pair<double, double> decode_lateral(double ux, double uy, double z,
                                         const CameraModel& cam, const BBox& box);

// Full-frame pose -> crop-normalized targets (apparent-rotation columns
// included).
TargetVector encode_pose(const Pose& pose, const CameraModel& cam, const BBox& box);

// Crop-normalized targets -> full-frame pose. The translation is decoded
// first; the rotation correction is built from that decoded translation.
Pose decode_pose(const TargetVector& t, const CameraModel& cam, const BBox& box);

}  // namespace posekit
