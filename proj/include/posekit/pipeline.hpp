#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "posekit/dataset_io.hpp"
#include "posekit/metrics.hpp"
#include "posekit/rng.hpp"

namespace posekit {

// A predictor emits exactly one payload per frame: raw targets (the normal
// case, decoded downstream against the same box it saw) or a finished pose
// (passthrough for externally decoded results).
struct PredictorOutput {
    std::optional<TargetVector> targets;
    std::optional<Pose> pose;
};

class Predictor {
  public:
    virtual ~Predictor() = default;
    virtual PredictorOutput predict(const std::string& frame_id, const CameraModel& cam,
                                    const BBox& box) = 0;
};

// Encodes the ground truth of the frame it is asked about, then corrupts it:
// zero-mean gaussian per component on (ux, uy, uz) with std sigma_u, and a
// random-axis rotation with gaussian angle of std sigma_r (radians) applied
// to the apparent rotation before the columns are taken. Both at zero
// reproduce the ground truth bit-exactly. Each frame draws from its own
// stream derived from (seed, frame_id), so results do not depend on
// evaluation order.
class OracleNoisyPredictor : public Predictor {
  public:
    OracleNoisyPredictor(const DatasetManifest& manifest, double sigma_u, double sigma_r,
                         std::uint64_t seed);

    PredictorOutput predict(const std::string& frame_id, const CameraModel& cam,
                            const BBox& box) override;

  private:
    std::map<std::string, Pose> gt_;
    double sigma_u_;
    double sigma_r_;
    Rng base_;
};

// Replays a prediction file. Construction checks every record against the
// manifest (UnknownFrame otherwise); predict throws UnknownFrame for frames
// the file does not cover.
class FilePredictor : public Predictor {
  public:
    FilePredictor(std::vector<PredictionRecord> records, const DatasetManifest& manifest);

    PredictorOutput predict(const std::string& frame_id, const CameraModel& cam,
                            const BBox& box) override;

  private:
    std::map<std::string, PredictionRecord> records_;
};

enum class BBoxSource {
    GroundTruth,
    Perturbed,  // ground-truth boxes, each side moved within +-frac
    File,
};

struct PipelineConfig {
    BBoxSource bbox_source = BBoxSource::GroundTruth;
    std::map<std::string, BBox> file_boxes;  // consulted when bbox_source == File
    double bbox_perturb_frac = 0.10;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    MetricsReport report;
    std::vector<PredictionRecord> predictions;
};

// Per frame: resolve a box (frames without one are skipped and counted),
// ask the predictor, decode targets against that same box, score against
// the ground truth. A frame whose prediction or decode throws is marked
// failed and the run continues. Throws EmptyDataset when nothing at all
// could be evaluated. Loss means are filled when at least one frame carried
// a raw-target payload.
PipelineResult run_pipeline(const DatasetManifest& manifest, Predictor& predictor,
                            const PipelineConfig& config);

struct SyntheticSpec {
    std::size_t count = 0;
    double z_min = 1.0;  // meters; must stay >= 1
    double z_max = 10.0;
    CameraModel camera{3000.0, 3000.0, 960.0, 600.0, 1920.0, 1200.0, 1.6};
    // Ground-truth boxes are this size, centered at this offset from the
    // projected object center, so the box center never coincides with the
    // projection (the general case of the lateral encoding).
    double box_width = 220.0;
    double box_height = 180.0;
    double box_offset_x = 18.0;
    double box_offset_y = -12.0;
    std::uint64_t seed = 0;
};

// Random manifest: rotations uniform on SO(3), Z uniform in [z_min, z_max],
// (X, Y) placed so the projection stays inside the image with a margin wide
// enough that the offset box fits even after a 10% perturbation. Throws
// SpecError on an unsatisfiable spec. Fixed seed gives an identical
// manifest.
DatasetManifest generate_synthetic(const SyntheticSpec& spec);

}  // namespace posekit
