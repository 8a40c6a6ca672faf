#pragma once

#include <optional>

#include "posekit/crop_targets.hpp"
#include "posekit/geometry.hpp"
#include "posekit/rng.hpp"

namespace posekit {

// Stochastic policy for the ground-truth-preserving augmentations. Ranges
// are radians internally; configuration files speak degrees.
struct AugmentationPolicy {
    double apply_prob = 0.5;
    double minor_min = deg_to_rad(-20.0);
    double minor_max = deg_to_rad(20.0);
    double major_min = deg_to_rad(160.0);
    double major_max = deg_to_rad(200.0);
    double range_choice_prob = 0.5;  // probability of picking the minor range
    double bbox_perturb_frac = 0.10;
    std::uint64_t seed = 0;
};

// Homogeneous 2D rotation by theta about the image center (W/2, H/2).
Mat3 image_rotation(double theta, double width, double height);

// Pose relabeling for an image rotated in-plane by theta:
// R -> Rz(theta) R, T -> Rz(theta) T.
Pose relabel_pose(const Pose& pose, double theta);

// Max elementwise |K^-1 M(theta) K - Rz(theta)|. Near zero when fx = fy and
// the principal point sits at the image center; grows otherwise. Diagnostic
// only, never throws.
double conjugation_check(const CameraModel& cam, double theta);

// Rotate the four corners by M(theta), take the axis-aligned hull, clip to
// the image. Throws DegenerateBox if the clipped hull collapses.
BBox relabel_bbox(const BBox& box, double theta, const CameraModel& cam);

// Move each side by an independent uniform draw within +-frac of the box
// dimension, clip to the image, and resample (up to 10 attempts) if the
// result is degenerate.
BBox perturb_bbox(const BBox& box, const CameraModel& cam, Rng& rng, double frac = 0.10);

// With probability 1-apply_prob returns nullopt; otherwise a uniform angle
// from the minor or major range, chosen per range_choice_prob.
std::optional<double> sample_augmentation(const AugmentationPolicy& policy, Rng& rng);

}  // namespace posekit
