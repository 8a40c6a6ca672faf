#include "posekit/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace posekit {

bool is_rotation(const Mat3& m, double tol) {
    if (!m.allFinite()) return false;
    const Mat3 gram = m.transpose() * m;
    if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(m.determinant() - 1.0) <= tol;
}

void validate_camera(const CameraModel& cam) {
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0))
        throw Error(ErrorKind::ValidationError, "camera focal lengths must be positive");
    if (!(cam.width > 0.0) || !(cam.height > 0.0))
        throw Error(ErrorKind::ValidationError, "camera image dimensions must be positive");
    if (!(cam.alpha > 0.0))
        throw Error(ErrorKind::ValidationError, "camera aspect factor must be positive");
    if (!std::isfinite(cam.cx) || !std::isfinite(cam.cy))
        throw Error(ErrorKind::ValidationError, "camera principal point must be finite");
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return m;
}

Mat3 rot_z(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 m;
    m << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return m;
}

Mat3 gram_schmidt(const SixDRotation& six) {
    const double n1 = six.r1.norm();
    if (n1 <= kSixDEps)
        throw Error(ErrorKind::DegenerateInput, "6D rotation: first column is near zero");
    const Vec3 r1 = six.r1 / n1;

    const Vec3 residual = six.r2 - r1.dot(six.r2) * r1;
    const double n2 = residual.norm();
    if (n2 <= kSixDEps)
        throw Error(ErrorKind::DegenerateInput,
                    "6D rotation: second column is near parallel to the first");
    const Vec3 r2 = residual / n2;

    Mat3 r;
    r.col(0) = r1;
    r.col(1) = r2;
    r.col(2) = r1.cross(r2);
    return r;
}

Mat3 rodrigues(const Vec3& axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > kRotationTol)
        throw Error(ErrorKind::DegenerateInput, "rotation axis must be unit length");
    const Mat3 k = skew(axis);
    return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

Mat3 apparent_correction(const Vec3& t) {
    if (!(t.z() > 0.0))
        throw Error(ErrorKind::BehindCamera, "translation must have positive depth");
    const Vec3 dir = t / t.norm();
    const Vec3 ez(0.0, 0.0, 1.0);
    // clamp absorbs rounding drift when dir is numerically on the axis
    const double angle = std::acos(std::clamp(dir.dot(ez), -1.0, 1.0));
    if (angle < kTinyAngle) return Mat3::Identity();
    const Vec3 cross = dir.cross(ez);
    return rodrigues(cross / cross.norm(), angle);
}

Mat3 to_apparent(const Mat3& rotation, const Vec3& t) {
    return apparent_correction(t) * rotation;
}

Mat3 from_apparent(const Mat3& apparent, const Vec3& t) {
    return apparent_correction(t).transpose() * apparent;
}

Eigen::Vector2d project(const CameraModel& cam, const Vec3& point) {
    if (!(point.z() > 0.0))
        throw Error(ErrorKind::BehindCamera, "cannot project a point with z <= 0");
    return {cam.fx * point.x() / point.z() + cam.cx,
            cam.fy * point.y() / point.z() + cam.cy};
}

Quat rotmat_to_quat(const Mat3& r) {
    Quat q(r);
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    return q;
}

Mat3 quat_to_rotmat(const Quat& q) {
    return q.normalized().toRotationMatrix();
}

Quat random_unit_quaternion(Rng& rng) {
    while (true) {
        const double w = rng.normal();
        const double x = rng.normal();
        const double y = rng.normal();
        const double z = rng.normal();
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (n < 1e-6) continue;
        Quat q(w / n, x / n, y / n, z / n);
        if (q.w() < 0.0) q.coeffs() = -q.coeffs();
        return q;
    }
}

}  // namespace posekit
