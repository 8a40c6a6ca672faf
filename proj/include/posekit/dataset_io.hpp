#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "posekit/augmentation.hpp"
#include "posekit/crop_targets.hpp"
#include "posekit/geometry.hpp"
#include "posekit/metrics.hpp"

namespace posekit {

struct FrameRecord {
    std::string frame_id;
    Pose gt_pose;
    std::optional<BBox> bbox;
};

struct DatasetManifest {
    CameraModel camera;
    std::vector<FrameRecord> frames;
    // provenance, filled by the loaders; not serialized
    std::string source_path;
    std::string content_hash;
    std::vector<std::string> warnings;
};

// Exactly one payload is set: raw network-space targets, or a decoded pose.
struct PredictionRecord {
    std::string frame_id;
    std::optional<TargetVector> targets;
    std::optional<Pose> pose;
};

// Field-name mapping so annotation layouts from different dataset releases
// load without code changes. Quaternions are scalar-first by default.
struct AnnotationSchema {
    std::string frame_id_field = "frame_id";
    std::string quaternion_field = "q";
    std::string translation_field = "t";
    std::string bbox_field = "bbox";
    bool scalar_first = true;
    double translation_scale = 1.0;  // meters per stored unit
};

AnnotationSchema load_schema(const std::string& path);

CameraModel load_camera(const std::string& path);
void save_camera(const CameraModel& cam, const std::string& path);

AugmentationPolicy load_policy(const std::string& path);

// Annotation document: {"camera": {...}?, "frames": [...]} or a bare array
// of frame objects. A camera passed here overrides the embedded one; one of
// the two must exist. Quaternions whose norm deviates from 1 by less than
// 1e-3 are renormalized, larger deviations are rejected.
DatasetManifest load_annotations(const std::string& path,
                                 const AnnotationSchema& schema = {},
                                 std::optional<CameraModel> camera = std::nullopt);

void save_manifest(const DatasetManifest& manifest, const std::string& path);

// Line-delimited records {"frame_id": ..., "bbox": [x_min, y_min, x_max, y_max]}.
// Boxes reaching past the image are clipped with a warning.
std::map<std::string, BBox> load_bboxes(const std::string& path, const CameraModel& cam,
                                        std::vector<std::string>* warnings = nullptr);

// Line-delimited records carrying either a "targets" or a "pose" payload.
std::vector<PredictionRecord> load_predictions(const std::string& path);
void save_predictions(const std::vector<PredictionRecord>& records, const std::string& path);

void save_report(const MetricsReport& report, const std::string& path);
MetricsReport load_report(const std::string& path);

// Human-readable rendering: per-frame table plus the summary block.
std::string render_report(const MetricsReport& report);

}  // namespace posekit
