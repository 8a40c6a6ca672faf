#pragma once

#include <Eigen/Dense>

#include "posekit/errors.hpp"
#include "posekit/rng.hpp"

namespace posekit {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

// Angles are radians everywhere inside the library; degrees appear only at
// CLI and report boundaries.
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Orthonormality / unit-norm tolerance shared by the rotation types.
inline constexpr double kRotationTol = 1e-9;
// Below this, a 6D column (or its residual after projection) is unusable.
inline constexpr double kSixDEps = 1e-9;
// Correction angles below this collapse to the identity.
inline constexpr double kTinyAngle = 1e-8;

// Raw first two columns of an apparent rotation matrix, as a network would
// emit them: unnormalized and not exactly orthogonal.
struct SixDRotation {
    Vec3 r1;
    Vec3 r2;
};

// Pinhole intrinsics plus the full-image geometry the crop math needs.
// alpha corrects a non-square full-image aspect ratio (1.6 for the
// 1920x1200 spacecraft datasets this tool is aimed at).
struct CameraModel {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double width = 0.0;
    double height = 0.0;
    double alpha = 1.6;
};

// Rigid transform of the object relative to the camera frame.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
};

bool is_rotation(const Mat3& m, double tol = kRotationTol);

// Throws ValidationError unless fx, fy, width, height, alpha are all > 0.
void validate_camera(const CameraModel& cam);

Mat3 skew(const Vec3& v);
Mat3 rot_z(double angle);

// Orthonormalize raw 6D columns into a full rotation matrix:
// r1 = normalize(r1_raw), r2 = normalize residual of r2_raw, r3 = r1 x r2.
// Throws DegenerateInput when either normalization divides by ~0.
Mat3 gram_schmidt(const SixDRotation& six);

// R = I + sin(angle) [u]x + (1 - cos(angle)) [u]x^2 for a unit axis u.
// Throws DegenerateInput when |axis| deviates from 1 beyond kRotationTol.
Mat3 rodrigues(const Vec3& axis, double angle);

// Rotation aligning the viewing direction t/|t| with the optical axis e_z.
// Angle below kTinyAngle returns the identity (the formula's limit).
// Throws BehindCamera when t.z <= 0.
Mat3 apparent_correction(const Vec3& t);

// Apparent orientation of an object at translation t: R' = dR * R.
Mat3 to_apparent(const Mat3& rotation, const Vec3& t);

// Inverse map: true orientation R = dR^T * R'.
Mat3 from_apparent(const Mat3& apparent, const Vec3& t);

// Pinhole projection to pixel coordinates. Throws BehindCamera when z <= 0.
Eigen::Vector2d project(const CameraModel& cam, const Vec3& point);

// Conversions canonicalize to the w >= 0 hemisphere. Every consumer of
// quaternions in this library is sign-invariant, so this is cosmetic.
Quat rotmat_to_quat(const Mat3& r);
Mat3 quat_to_rotmat(const Quat& q);

// Uniform over the rotation group, via a normalized 4D gaussian.
Quat random_unit_quaternion(Rng& rng);

}  // namespace posekit
