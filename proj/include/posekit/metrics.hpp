#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posekit/crop_targets.hpp"
#include "posekit/geometry.hpp"

namespace posekit {

struct PosePair {
    Pose pred;
    Pose gt;
};

struct FrameScore {
    std::string frame_id;
    double et_m = 0.0;
    double er_deg = 0.0;
};

struct MetricsReport {
    std::vector<FrameScore> frames;
    double mean_et_m = 0.0;
    double mean_er_deg = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;  // frames with no usable box
    std::size_t failed = 0;   // frames whose prediction or decode errored
    std::vector<std::string> skipped_frames;
    std::vector<std::string> failed_frames;
    std::optional<double> mean_rotation_loss;
    std::optional<double> mean_translation_loss;
    std::optional<double> mean_total_loss;
};

// Euclidean distance between predicted and ground-truth translations, meters.
double translation_error(const PosePair& pair);

// Geodesic distance between the two orientations, degrees in [0, 180].
// Sign-invariant in both quaternions.
double rotation_error(const PosePair& pair);
double rotation_error_deg(const Quat& pred, const Quat& gt);

// Squared Frobenius distance between the predicted raw columns and the first
// two columns of the ground-truth apparent rotation.
double rotation_loss(const SixDRotation& pred, const Mat3& gt_apparent);

// Squared L2 distance over (ux, uy, uz).
double translation_loss(const TargetVector& pred, const TargetVector& gt);

double total_loss(double rotation, double translation);

// Dataset means of per-frame scores. Compensated summation keeps the result
// reproducible under reordering to ~1e-12. Throws EmptyDataset.
MetricsReport aggregate(const std::vector<PosePair>& pairs);

}  // namespace posekit
