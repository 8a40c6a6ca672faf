#include "posekit/metrics.hpp"

#include <cmath>

namespace posekit {

namespace {

// Kahan compensated accumulator.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double value) {
        const double y = value - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

double translation_error(const PosePair& pair) {
    return (pair.pred.translation - pair.gt.translation).norm();
}

double rotation_error_deg(const Quat& pred, const Quat& gt) {
    Eigen::Vector4d a = pred.normalized().coeffs();
    Eigen::Vector4d b = gt.normalized().coeffs();
    if (a.dot(b) < 0.0) b = -b;
    // Equals 2*acos(|<pred, gt>|): with d = <a,b> >= 0, |a-b| = 2 sin(t/4)
    // and |a+b| = 2 cos(t/4) for t = 2*acos(d). The atan2 form keeps full
    // precision near t = 0, where acos of a rounded dot cannot.
    const double angle = 4.0 * std::atan2((a - b).norm(), (a + b).norm());
    return rad_to_deg(angle);
}

double rotation_error(const PosePair& pair) {
    return rotation_error_deg(rotmat_to_quat(pair.pred.rotation),
                              rotmat_to_quat(pair.gt.rotation));
}

double rotation_loss(const SixDRotation& pred, const Mat3& gt_apparent) {
    return (pred.r1 - gt_apparent.col(0)).squaredNorm() +
           (pred.r2 - gt_apparent.col(1)).squaredNorm();
}

double translation_loss(const TargetVector& pred, const TargetVector& gt) {
    const double dx = pred.ux - gt.ux;
    const double dy = pred.uy - gt.uy;
    const double dz = pred.uz - gt.uz;
    return dx * dx + dy * dy + dz * dz;
}

double total_loss(double rotation, double translation) {
    return rotation + translation;
}

MetricsReport aggregate(const std::vector<PosePair>& pairs) {
    if (pairs.empty())
        throw Error(ErrorKind::EmptyDataset, "no pose pairs to aggregate");
    MetricsReport report;
    report.frames.reserve(pairs.size());
    KahanSum et;
    KahanSum er;
    for (const PosePair& pair : pairs) {
        FrameScore score;
        score.et_m = translation_error(pair);
        score.er_deg = rotation_error(pair);
        et.add(score.et_m);
        er.add(score.er_deg);
        report.frames.push_back(std::move(score));
    }
    report.evaluated = pairs.size();
    report.mean_et_m = et.sum / static_cast<double>(pairs.size());
    report.mean_er_deg = er.sum / static_cast<double>(pairs.size());
    return report;
}

}  // namespace posekit
