#include "posekit/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

#include "posekit/augmentation.hpp"

namespace posekit {

namespace {

Mat3 six_to_matrix(const SixDRotation& six) {
    Mat3 m;
    m.col(0) = six.r1;
    m.col(1) = six.r2;
    m.col(2) = six.r1.cross(six.r2);
    return m;
}

Vec3 random_unit_axis(Rng& rng) {
    while (true) {
        const Vec3 v(rng.normal(), rng.normal(), rng.normal());
        const double n = v.norm();
        if (n > 1e-12) return v / n;
    }
}

}  // namespace

OracleNoisyPredictor::OracleNoisyPredictor(const DatasetManifest& manifest, double sigma_u,
                                           double sigma_r, std::uint64_t seed)
    : sigma_u_(sigma_u), sigma_r_(sigma_r), base_(seed) {
    if (sigma_u < 0.0 || sigma_r < 0.0)
        throw Error(ErrorKind::ValidationError, "oracle noise levels must be >= 0");
    for (const FrameRecord& frame : manifest.frames) gt_.emplace(frame.frame_id, frame.gt_pose);
}

PredictorOutput OracleNoisyPredictor::predict(const std::string& frame_id, const CameraModel& cam,
                                              const BBox& box) {
    auto it = gt_.find(frame_id);
    if (it == gt_.end())
        throw Error(ErrorKind::UnknownFrame, "oracle has no ground truth for '" + frame_id + "'");
    TargetVector t = encode_pose(it->second, cam, box);
    if (sigma_u_ > 0.0 || sigma_r_ > 0.0) {
        Rng rng = base_.split(frame_id);
        if (sigma_r_ > 0.0) {
            const Vec3 axis = random_unit_axis(rng);
            const double angle = sigma_r_ * rng.normal();
            const Mat3 noisy = rodrigues(axis, angle) * six_to_matrix(t.six);
            t.six = {noisy.col(0), noisy.col(1)};
        }
        if (sigma_u_ > 0.0) {
            t.ux += sigma_u_ * rng.normal();
            t.uy += sigma_u_ * rng.normal();
            t.uz += sigma_u_ * rng.normal();
        }
    }
    return {t, std::nullopt};
}

FilePredictor::FilePredictor(std::vector<PredictionRecord> records,
                             const DatasetManifest& manifest) {
    std::set<std::string> known;
    for (const FrameRecord& frame : manifest.frames) known.insert(frame.frame_id);
    for (PredictionRecord& record : records) {
        if (!known.count(record.frame_id))
            throw Error(ErrorKind::UnknownFrame,
                        "prediction for '" + record.frame_id + "' matches no dataset frame");
        if (record.targets.has_value() == record.pose.has_value())
            throw Error(ErrorKind::ValidationError,
                        "prediction for '" + record.frame_id + "' must carry exactly one payload");
        const std::string id = record.frame_id;
        if (!records_.emplace(id, std::move(record)).second)
            throw Error(ErrorKind::ValidationError, "duplicate prediction for '" + id + "'");
    }
}

PredictorOutput FilePredictor::predict(const std::string& frame_id, const CameraModel&,
                                       const BBox&) {
    auto it = records_.find(frame_id);
    if (it == records_.end())
        throw Error(ErrorKind::UnknownFrame, "prediction file has no record for '" + frame_id + "'");
    return {it->second.targets, it->second.pose};
}

PipelineResult run_pipeline(const DatasetManifest& manifest, Predictor& predictor,
                            const PipelineConfig& config) {
    const CameraModel& cam = manifest.camera;
    const Rng box_base = Rng(config.seed).split("bbox");

    std::vector<PosePair> pairs;
    std::vector<std::string> pair_ids;
    std::vector<std::string> skipped;
    std::vector<std::string> failed;
    std::vector<PredictionRecord> predictions;

    // Loss accumulators over frames with raw-target payloads.
    double loss_r = 0.0, loss_t = 0.0;
    std::size_t loss_n = 0;

    for (const FrameRecord& frame : manifest.frames) {
        std::optional<BBox> box;
        if (config.bbox_source == BBoxSource::File) {
            auto it = config.file_boxes.find(frame.frame_id);
            if (it != config.file_boxes.end()) box = it->second;
        } else if (frame.bbox) {
            if (config.bbox_source == BBoxSource::Perturbed) {
                Rng rng = box_base.split(frame.frame_id);
                box = perturb_bbox(*frame.bbox, cam, rng, config.bbox_perturb_frac);
            } else {
                box = frame.bbox;
            }
        }
        if (!box) {
            skipped.push_back(frame.frame_id);
            continue;
        }
        try {
            const PredictorOutput out = predictor.predict(frame.frame_id, cam, *box);
            if (out.targets.has_value() == out.pose.has_value())
                throw Error(ErrorKind::Internal,
                            "predictor emitted " + std::string(out.targets ? "two payloads"
                                                                           : "no payload"));
            Pose decoded;
            PredictionRecord record;
            record.frame_id = frame.frame_id;
            if (out.targets) {
                decoded = decode_pose(*out.targets, cam, *box);
                record.targets = out.targets;
                const TargetVector gt_targets = encode_pose(frame.gt_pose, cam, *box);
                loss_r += rotation_loss(out.targets->six, six_to_matrix(gt_targets.six));
                loss_t += translation_loss(*out.targets, gt_targets);
                ++loss_n;
            } else {
                decoded = *out.pose;
                record.pose = out.pose;
            }
            predictions.push_back(std::move(record));
            pairs.push_back({decoded, frame.gt_pose});
            pair_ids.push_back(frame.frame_id);
        } catch (const Error&) {
            failed.push_back(frame.frame_id);
        }
    }

    if (pairs.empty())
        throw Error(ErrorKind::EmptyDataset, "pipeline evaluated no frames (" +
                                                 std::to_string(skipped.size()) + " skipped, " +
                                                 std::to_string(failed.size()) + " failed)");

    PipelineResult result;
    result.report = aggregate(pairs);
    for (std::size_t i = 0; i < pair_ids.size(); ++i)
        result.report.frames[i].frame_id = pair_ids[i];
    result.report.skipped = skipped.size();
    result.report.failed = failed.size();
    result.report.skipped_frames = std::move(skipped);
    result.report.failed_frames = std::move(failed);
    if (loss_n > 0) {
        result.report.mean_rotation_loss = loss_r / static_cast<double>(loss_n);
        result.report.mean_translation_loss = loss_t / static_cast<double>(loss_n);
        result.report.mean_total_loss =
            total_loss(*result.report.mean_rotation_loss, *result.report.mean_translation_loss);
    }
    result.predictions = std::move(predictions);
    return result;
}

DatasetManifest generate_synthetic(const SyntheticSpec& spec) {
    if (spec.count == 0) throw Error(ErrorKind::SpecError, "synthetic count must be >= 1");
    if (spec.z_min < 1.0) throw Error(ErrorKind::SpecError, "z_min must be >= 1 m");
    if (spec.z_max < spec.z_min) throw Error(ErrorKind::SpecError, "z_max must be >= z_min");
    try {
        validate_camera(spec.camera);
    } catch (const Error& e) {
        throw Error(ErrorKind::SpecError, std::string("synthetic camera: ") + e.what());
    }
    if (spec.box_width <= kBoxEps || spec.box_height <= kBoxEps)
        throw Error(ErrorKind::SpecError, "synthetic box dimensions too small");

    // Keep the projected center far enough from the border that the offset
    // box, grown by a 10% per-side perturbation, still fits.
    const double margin_x =
        0.5 * spec.box_width + std::abs(spec.box_offset_x) + 0.1 * spec.box_width + 2.0;
    const double margin_y =
        0.5 * spec.box_height + std::abs(spec.box_offset_y) + 0.1 * spec.box_height + 2.0;
    if (2.0 * margin_x >= spec.camera.width || 2.0 * margin_y >= spec.camera.height)
        throw Error(ErrorKind::SpecError, "synthetic box does not fit the image");

    DatasetManifest manifest;
    manifest.camera = spec.camera;
    manifest.source_path = "<synthetic>";
    const Rng base(spec.seed);
    for (std::size_t i = 0; i < spec.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "synthetic_%06zu", i);
        FrameRecord frame;
        frame.frame_id = name;

        Rng rng = base.split(frame.frame_id);
        frame.gt_pose.rotation = quat_to_rotmat(random_unit_quaternion(rng));
        const double z = rng.uniform(spec.z_min, spec.z_max);
        const double px = rng.uniform(margin_x, spec.camera.width - margin_x);
        const double py = rng.uniform(margin_y, spec.camera.height - margin_y);
        frame.gt_pose.translation =
            Vec3((px - spec.camera.cx) * z / spec.camera.fx,
                 (py - spec.camera.cy) * z / spec.camera.fy, z);

        const double bx = px + spec.box_offset_x;
        const double by = py + spec.box_offset_y;
        frame.bbox = BBox{bx - 0.5 * spec.box_width, by - 0.5 * spec.box_height,
                          bx + 0.5 * spec.box_width, by + 0.5 * spec.box_height};
        manifest.frames.push_back(std::move(frame));
    }
    return manifest;
}

}  // namespace posekit
