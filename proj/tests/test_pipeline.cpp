#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "posekit/augmentation.hpp"
#include "posekit/pipeline.hpp"
#include "test_support.hpp"

using namespace posekit;

namespace {

DatasetManifest small_manifest(std::size_t count, std::uint64_t seed = 5) {
    SyntheticSpec spec;
    spec.count = count;
    spec.seed = seed;
    return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("generate_synthetic validates its spec") {
    SyntheticSpec spec;
    spec.count = 0;
    CHECK_THROWS_AS(generate_synthetic(spec), Error);
    spec.count = 5;
    spec.z_min = 0.5;
    CHECK_THROWS_AS(generate_synthetic(spec), Error);
    spec = SyntheticSpec{};
    spec.count = 5;
    spec.z_max = 0.0;
    CHECK_THROWS_AS(generate_synthetic(spec), Error);
    spec = SyntheticSpec{};
    spec.count = 5;
    spec.box_width = 5000.0;
    try {
        generate_synthetic(spec);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SpecError);
    }
}

TEST_CASE("generate_synthetic output satisfies the frame invariants") {
    SyntheticSpec spec;
    spec.count = 1000;
    spec.seed = 404;
    const DatasetManifest m = generate_synthetic(spec);
    REQUIRE(m.frames.size() == 1000);

    std::set<std::string> ids;
    for (const FrameRecord& frame : m.frames) {
        CHECK(ids.insert(frame.frame_id).second);
        CHECK(is_rotation(frame.gt_pose.rotation));
        CHECK(frame.gt_pose.translation.z() >= spec.z_min);
        CHECK(frame.gt_pose.translation.z() <= spec.z_max);
        REQUIRE(frame.bbox.has_value());
        CHECK(frame.bbox->valid());
        CHECK(frame.bbox->x_min >= 0.0);
        CHECK(frame.bbox->y_min >= 0.0);
        CHECK(frame.bbox->x_max <= m.camera.width);
        CHECK(frame.bbox->y_max <= m.camera.height);
        const Eigen::Vector2d pixel = project(m.camera, frame.gt_pose.translation);
        CHECK(pixel.x() > 0.0);
        CHECK(pixel.x() < m.camera.width);
        CHECK(pixel.y() > 0.0);
        CHECK(pixel.y() < m.camera.height);
        // the box center is offset from the projection on purpose
        CHECK(std::abs(frame.bbox->center_x() - pixel.x() - spec.box_offset_x) < 1e-9);
        CHECK(std::abs(frame.bbox->center_y() - pixel.y() - spec.box_offset_y) < 1e-9);
    }
}

TEST_CASE("generate_synthetic is bit-identical for a fixed seed") {
    const DatasetManifest a = small_manifest(200, 77);
    const DatasetManifest b = small_manifest(200, 77);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i].frame_id == b.frames[i].frame_id);
        CHECK((a.frames[i].gt_pose.rotation - b.frames[i].gt_pose.rotation).cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK(a.frames[i].gt_pose.translation.x() == b.frames[i].gt_pose.translation.x());
        CHECK(a.frames[i].bbox->x_min == b.frames[i].bbox->x_min);
    }
    const DatasetManifest c = small_manifest(200, 78);
    CHECK(a.frames[0].gt_pose.translation.x() != c.frames[0].gt_pose.translation.x());
}

TEST_CASE("zero-noise oracle is exact for every box source") {
    const DatasetManifest manifest = small_manifest(500);
    OracleNoisyPredictor oracle(manifest, 0.0, 0.0, 123);

    PipelineConfig config;
    config.seed = 9;
    for (const BBoxSource source :
         {BBoxSource::GroundTruth, BBoxSource::Perturbed, BBoxSource::File}) {
        config.bbox_source = source;
        if (source == BBoxSource::File) {
            Rng rng(55);
            for (const FrameRecord& frame : manifest.frames)
                config.file_boxes[frame.frame_id] =
                    perturb_bbox(*frame.bbox, manifest.camera, rng, 0.08);
        }
        const PipelineResult result = run_pipeline(manifest, oracle, config);
        CHECK(result.report.evaluated == manifest.frames.size());
        CHECK(result.report.skipped == 0);
        CHECK(result.report.failed == 0);
        CHECK(result.report.mean_et_m < 1e-9);
        CHECK(result.report.mean_er_deg < 1e-6);
        REQUIRE(result.report.mean_total_loss.has_value());
        CHECK(*result.report.mean_total_loss < 1e-15);
        CHECK(result.predictions.size() == manifest.frames.size());
    }
}

TEST_CASE("mean translation error grows monotonically with target noise") {
    const DatasetManifest manifest = small_manifest(1000, 31);
    PipelineConfig config;

    double previous = -1.0;
    for (const double sigma : {0.001, 0.01, 0.1}) {
        OracleNoisyPredictor oracle(manifest, sigma, 0.0, 2024);
        const PipelineResult result = run_pipeline(manifest, oracle, config);
        CHECK(result.report.mean_et_m > previous);
        previous = result.report.mean_et_m;
        // translation noise bleeds into rotation only through the decoded
        // correction, so the rotation error stays comparatively small
        CHECK(result.report.mean_er_deg < 45.0);
        CHECK(result.report.mean_er_deg > 0.0);
    }
}

TEST_CASE("mean rotation error grows monotonically with rotation noise") {
    const DatasetManifest manifest = small_manifest(600, 32);
    PipelineConfig config;

    double previous = -1.0;
    for (const double sigma : {0.001, 0.01, 0.1}) {
        OracleNoisyPredictor oracle(manifest, 0.0, sigma, 99);
        const PipelineResult result = run_pipeline(manifest, oracle, config);
        CHECK(result.report.mean_er_deg > previous);
        previous = result.report.mean_er_deg;
        // rotation noise leaves the translation targets untouched
        CHECK(result.report.mean_et_m < 1e-9);
    }
}

TEST_CASE("oracle results do not depend on frame order") {
    DatasetManifest manifest = small_manifest(100, 8);
    PipelineConfig config;
    config.bbox_source = BBoxSource::Perturbed;
    config.seed = 3;

    OracleNoisyPredictor oracle(manifest, 0.05, 0.02, 17);
    const PipelineResult forward = run_pipeline(manifest, oracle, config);

    DatasetManifest reversed = manifest;
    std::reverse(reversed.frames.begin(), reversed.frames.end());
    OracleNoisyPredictor oracle2(reversed, 0.05, 0.02, 17);
    const PipelineResult backward = run_pipeline(reversed, oracle2, config);

    CHECK(std::abs(forward.report.mean_et_m - backward.report.mean_et_m) < 1e-12);
    CHECK(std::abs(forward.report.mean_er_deg - backward.report.mean_er_deg) < 1e-12);
    // per-frame scores are identical frame-by-frame, independent of position
    CHECK(forward.report.frames.front().frame_id == backward.report.frames.back().frame_id);
    CHECK(forward.report.frames.front().et_m == backward.report.frames.back().et_m);
}

TEST_CASE("file predictor replays an oracle run identically") {
    const DatasetManifest manifest = small_manifest(120, 9);
    PipelineConfig config;

    OracleNoisyPredictor oracle(manifest, 0.02, 0.01, 400);
    const PipelineResult live = run_pipeline(manifest, oracle, config);

    FilePredictor replay(live.predictions, manifest);
    const PipelineResult replayed = run_pipeline(manifest, replay, config);

    CHECK(replayed.report.evaluated == live.report.evaluated);
    CHECK(replayed.report.mean_et_m == live.report.mean_et_m);
    CHECK(replayed.report.mean_er_deg == live.report.mean_er_deg);
}

TEST_CASE("file predictor flags unknown and missing frames") {
    const DatasetManifest manifest = small_manifest(10);

    std::vector<PredictionRecord> extra;
    PredictionRecord record;
    record.frame_id = "not_in_dataset";
    record.pose = Pose{};
    extra.push_back(record);
    CHECK_THROWS_AS(FilePredictor(std::move(extra), manifest), Error);

    // a file covering only half the frames: the rest fail and are listed
    OracleNoisyPredictor oracle(manifest, 0.0, 0.0, 1);
    PipelineConfig config;
    const PipelineResult full = run_pipeline(manifest, oracle, config);
    std::vector<PredictionRecord> half(full.predictions.begin(),
                                       full.predictions.begin() + 5);
    FilePredictor partial(half, manifest);
    const PipelineResult result = run_pipeline(manifest, partial, config);
    CHECK(result.report.evaluated == 5);
    CHECK(result.report.failed == 5);
    CHECK(result.report.failed_frames.size() == 5);
    CHECK(result.report.mean_et_m < 1e-9);
}

TEST_CASE("pose payloads bypass decoding") {
    const DatasetManifest manifest = small_manifest(20);
    std::vector<PredictionRecord> records;
    for (const FrameRecord& frame : manifest.frames) {
        PredictionRecord record;
        record.frame_id = frame.frame_id;
        record.pose = frame.gt_pose;
        records.push_back(record);
    }
    FilePredictor predictor(std::move(records), manifest);
    PipelineConfig config;
    const PipelineResult result = run_pipeline(manifest, predictor, config);
    CHECK(result.report.mean_et_m == 0.0);
    CHECK(result.report.mean_er_deg < 1e-9);
    // pose payloads carry no targets, so no loss means are reported
    CHECK_FALSE(result.report.mean_total_loss.has_value());
}

TEST_CASE("frames without boxes are skipped and counted") {
    DatasetManifest manifest = small_manifest(30);
    manifest.frames[3].bbox.reset();
    manifest.frames[17].bbox.reset();
    OracleNoisyPredictor oracle(manifest, 0.0, 0.0, 6);
    PipelineConfig config;
    const PipelineResult result = run_pipeline(manifest, oracle, config);
    CHECK(result.report.evaluated == 28);
    CHECK(result.report.skipped == 2);
    REQUIRE(result.report.skipped_frames.size() == 2);
    CHECK(result.report.skipped_frames[0] == manifest.frames[3].frame_id);
    CHECK(result.report.skipped_frames[1] == manifest.frames[17].frame_id);

    DatasetManifest boxless = manifest;
    for (FrameRecord& frame : boxless.frames) frame.bbox.reset();
    OracleNoisyPredictor oracle2(boxless, 0.0, 0.0, 6);
    CHECK_THROWS_AS(run_pipeline(boxless, oracle2, config), Error);
}

TEST_CASE("one failing frame never alters the others") {
    const DatasetManifest manifest = small_manifest(25, 12);
    OracleNoisyPredictor oracle(manifest, 0.0, 0.0, 2);
    PipelineConfig config;
    const PipelineResult clean = run_pipeline(manifest, oracle, config);

    PipelineResult live = run_pipeline(manifest, oracle, config);
    std::vector<PredictionRecord> records = live.predictions;
    records[10].targets->uz = -5.0;  // decodes to NonPositiveDepth
    FilePredictor poisoned(records, manifest);
    const PipelineResult result = run_pipeline(manifest, poisoned, config);

    CHECK(result.report.evaluated == 24);
    CHECK(result.report.failed == 1);
    REQUIRE(result.report.failed_frames.size() == 1);
    CHECK(result.report.failed_frames[0] == manifest.frames[10].frame_id);

    // every surviving frame scores exactly as in the clean run
    std::size_t matched = 0;
    for (const FrameScore& score : result.report.frames) {
        for (const FrameScore& ref : clean.report.frames) {
            if (ref.frame_id == score.frame_id) {
                CHECK(score.et_m == ref.et_m);
                CHECK(score.er_deg == ref.er_deg);
                ++matched;
            }
        }
    }
    CHECK(matched == 24);
}

TEST_CASE("predictors reject unknown frames at lookup") {
    const DatasetManifest manifest = small_manifest(5);
    OracleNoisyPredictor oracle(manifest, 0.0, 0.0, 3);
    const BBox box{100, 100, 300, 300};
    CHECK_THROWS_AS(oracle.predict("missing", manifest.camera, box), Error);
    try {
        oracle.predict("missing", manifest.camera, box);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownFrame);
    }
}
