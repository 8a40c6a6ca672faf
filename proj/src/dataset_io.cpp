#include "posekit/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

namespace posekit {

namespace {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorKind::IoError, "short write to " + path);
}

Json parse_json(const std::string& text, const std::string& context) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, context + ": " + e.what());
    }
}

const Json& require_field(const Json& obj, const std::string& field, const std::string& context) {
    auto it = obj.find(field);
    if (it == obj.end())
        throw Error(ErrorKind::SchemaError, context + ": missing field '" + field + "'");
    return *it;
}

double require_number(const Json& obj, const std::string& field, const std::string& context) {
    const Json& value = require_field(obj, field, context);
    if (!value.is_number())
        throw Error(ErrorKind::SchemaError, context + ": field '" + field + "' must be a number");
    return value.get<double>();
}

std::vector<double> require_numbers(const Json& obj, const std::string& field, std::size_t count,
                                    const std::string& context) {
    const Json& value = require_field(obj, field, context);
    if (!value.is_array() || value.size() != count)
        throw Error(ErrorKind::SchemaError, context + ": field '" + field + "' must be an array of " +
                                                std::to_string(count) + " numbers");
    std::vector<double> out;
    out.reserve(count);
    for (const Json& item : value) {
        if (!item.is_number())
            throw Error(ErrorKind::SchemaError,
                        context + ": field '" + field + "' must contain only numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

CameraModel camera_from_json(const Json& obj, const std::string& context) {
    CameraModel cam;
    cam.fx = require_number(obj, "fx", context);
    cam.fy = require_number(obj, "fy", context);
    cam.cx = require_number(obj, "cx", context);
    cam.cy = require_number(obj, "cy", context);
    cam.width = require_number(obj, "width", context);
    cam.height = require_number(obj, "height", context);
    if (obj.contains("alpha")) cam.alpha = require_number(obj, "alpha", context);
    validate_camera(cam);
    return cam;
}

Json camera_to_json(const CameraModel& cam) {
    return Json{{"fx", cam.fx},   {"fy", cam.fy},         {"cx", cam.cx},
                {"cy", cam.cy},   {"width", cam.width},   {"height", cam.height},
                {"alpha", cam.alpha}};
}

Json bbox_to_json(const BBox& box) {
    return Json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

BBox bbox_from_numbers(const std::vector<double>& v) {
    return BBox{v[0], v[1], v[2], v[3]};
}

// Validates, clips to the image, and reports via `warnings`.
BBox sanitize_bbox(BBox box, const CameraModel& cam, const std::string& context,
                   std::vector<std::string>* warnings) {
    if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min))
        throw Error(ErrorKind::ValidationError, context + ": box has non-positive extent");
    if (box.x_min < 0.0 || box.y_min < 0.0 || box.x_max > cam.width || box.y_max > cam.height) {
        box.x_min = std::clamp(box.x_min, 0.0, cam.width);
        box.x_max = std::clamp(box.x_max, 0.0, cam.width);
        box.y_min = std::clamp(box.y_min, 0.0, cam.height);
        box.y_max = std::clamp(box.y_max, 0.0, cam.height);
        if (warnings) warnings->push_back(context + ": box clipped to image bounds");
    }
    if (!box.valid())
        throw Error(ErrorKind::ValidationError, context + ": box degenerate after clipping");
    return box;
}

Quat quat_from_values(const std::vector<double>& v, bool scalar_first, const std::string& context) {
    const double w = scalar_first ? v[0] : v[3];
    const double x = scalar_first ? v[1] : v[0];
    const double y = scalar_first ? v[2] : v[1];
    const double z = scalar_first ? v[3] : v[2];
    const double norm = std::sqrt(w * w + x * x + y * y + z * z);
    if (std::abs(norm - 1.0) >= 1e-3)
        throw Error(ErrorKind::ValidationError,
                    context + ": quaternion norm " + std::to_string(norm) + " too far from 1");
    return Quat(w / norm, x / norm, y / norm, z / norm);
}

Json targets_to_json(const TargetVector& t) {
    return Json{{"u", Json::array({t.ux, t.uy, t.uz})},
                {"r1", Json::array({t.six.r1.x(), t.six.r1.y(), t.six.r1.z()})},
                {"r2", Json::array({t.six.r2.x(), t.six.r2.y(), t.six.r2.z()})}};
}

TargetVector targets_from_json(const Json& obj, const std::string& context) {
    const auto u = require_numbers(obj, "u", 3, context);
    const auto r1 = require_numbers(obj, "r1", 3, context);
    const auto r2 = require_numbers(obj, "r2", 3, context);
    TargetVector t;
    t.ux = u[0];
    t.uy = u[1];
    t.uz = u[2];
    t.six = {Vec3(r1[0], r1[1], r1[2]), Vec3(r2[0], r2[1], r2[2])};
    return t;
}

Json pose_to_json(const Pose& pose) {
    const Quat q = rotmat_to_quat(pose.rotation);
    return Json{{"q", Json::array({q.w(), q.x(), q.y(), q.z()})},
                {"t", Json::array({pose.translation.x(), pose.translation.y(),
                                   pose.translation.z()})}};
}

Pose pose_from_json(const Json& obj, const std::string& context) {
    const auto q = require_numbers(obj, "q", 4, context);
    const auto t = require_numbers(obj, "t", 3, context);
    Pose pose;
    pose.rotation = quat_to_rotmat(quat_from_values(q, true, context));
    pose.translation = Vec3(t[0], t[1], t[2]);
    return pose;
}

// Applies `fn` to every non-empty line; context strings carry line numbers.
template <typename Fn>
void for_each_record_line(const std::string& path, Fn&& fn) {
    const std::string text = read_file(path);
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string context = path + ":" + std::to_string(line_no);
        fn(parse_json(line, context), context);
    }
}

}  // namespace

AnnotationSchema load_schema(const std::string& path) {
    const Json doc = parse_json(read_file(path), path);
    AnnotationSchema schema;
    if (doc.contains("frame_id_field")) schema.frame_id_field = doc["frame_id_field"].get<std::string>();
    if (doc.contains("quaternion_field"))
        schema.quaternion_field = doc["quaternion_field"].get<std::string>();
    if (doc.contains("translation_field"))
        schema.translation_field = doc["translation_field"].get<std::string>();
    if (doc.contains("bbox_field")) schema.bbox_field = doc["bbox_field"].get<std::string>();
    if (doc.contains("quaternion_order")) {
        const std::string order = doc["quaternion_order"].get<std::string>();
        if (order == "wxyz")
            schema.scalar_first = true;
        else if (order == "xyzw")
            schema.scalar_first = false;
        else
            throw Error(ErrorKind::SchemaError, path + ": quaternion_order must be wxyz or xyzw");
    }
    if (doc.contains("translation_scale"))
        schema.translation_scale = doc["translation_scale"].get<double>();
    return schema;
}

CameraModel load_camera(const std::string& path) {
    return camera_from_json(parse_json(read_file(path), path), path);
}

void save_camera(const CameraModel& cam, const std::string& path) {
    write_file(path, camera_to_json(cam).dump(2) + "\n");
}

AugmentationPolicy load_policy(const std::string& path) {
    const Json doc = parse_json(read_file(path), path);
    AugmentationPolicy policy;
    if (doc.contains("apply_prob")) policy.apply_prob = doc["apply_prob"].get<double>();
    if (doc.contains("minor_range_deg")) {
        const auto range = require_numbers(doc, "minor_range_deg", 2, path);
        policy.minor_min = deg_to_rad(range[0]);
        policy.minor_max = deg_to_rad(range[1]);
    }
    if (doc.contains("major_range_deg")) {
        const auto range = require_numbers(doc, "major_range_deg", 2, path);
        policy.major_min = deg_to_rad(range[0]);
        policy.major_max = deg_to_rad(range[1]);
    }
    if (doc.contains("range_choice_prob"))
        policy.range_choice_prob = doc["range_choice_prob"].get<double>();
    if (doc.contains("bbox_perturb_frac"))
        policy.bbox_perturb_frac = doc["bbox_perturb_frac"].get<double>();
    if (doc.contains("seed")) policy.seed = doc["seed"].get<std::uint64_t>();
    if (policy.apply_prob < 0.0 || policy.apply_prob > 1.0 || policy.range_choice_prob < 0.0 ||
        policy.range_choice_prob > 1.0)
        throw Error(ErrorKind::ValidationError, path + ": probabilities must lie in [0, 1]");
    if (policy.minor_min > policy.minor_max || policy.major_min > policy.major_max)
        throw Error(ErrorKind::ValidationError, path + ": rotation ranges must be ordered");
    return policy;
}

DatasetManifest load_annotations(const std::string& path, const AnnotationSchema& schema,
                                 std::optional<CameraModel> camera) {
    const std::string text = read_file(path);
    const Json doc = parse_json(text, path);

    DatasetManifest manifest;
    manifest.source_path = path;
    manifest.content_hash = fnv1a_hex(text);

    const Json* frames = nullptr;
    if (doc.is_array()) {
        frames = &doc;
    } else if (doc.is_object()) {
        if (doc.contains("camera") && !camera)
            camera = camera_from_json(doc["camera"], path + ":camera");
        frames = &require_field(doc, "frames", path);
        if (!frames->is_array())
            throw Error(ErrorKind::SchemaError, path + ": 'frames' must be an array");
    } else {
        throw Error(ErrorKind::SchemaError, path + ": expected an object or an array");
    }
    if (!camera)
        throw Error(ErrorKind::SchemaError,
                    path + ": no camera block in the document and none supplied");
    manifest.camera = *camera;

    std::set<std::string> seen;
    for (const Json& entry : *frames) {
        const std::string context = path + " frame " + std::to_string(manifest.frames.size());
        if (!entry.is_object())
            throw Error(ErrorKind::SchemaError, context + ": frame entries must be objects");
        FrameRecord record;
        const Json& id = require_field(entry, schema.frame_id_field, context);
        record.frame_id = id.is_string() ? id.get<std::string>() : id.dump();
        if (!seen.insert(record.frame_id).second)
            throw Error(ErrorKind::ValidationError, context + ": duplicate frame_id '" +
                                                        record.frame_id + "'");
        const auto q = require_numbers(entry, schema.quaternion_field, 4, context);
        const auto t = require_numbers(entry, schema.translation_field, 3, context);
        record.gt_pose.rotation =
            quat_to_rotmat(quat_from_values(q, schema.scalar_first, context));
        record.gt_pose.translation = schema.translation_scale * Vec3(t[0], t[1], t[2]);
        if (!(record.gt_pose.translation.z() > 0.0))
            manifest.warnings.push_back(context + " ('" + record.frame_id +
                                        "'): non-positive depth");
        if (entry.contains(schema.bbox_field)) {
            const auto b = require_numbers(entry, schema.bbox_field, 4, context);
            record.bbox = sanitize_bbox(bbox_from_numbers(b), manifest.camera, context,
                                        &manifest.warnings);
        }
        manifest.frames.push_back(std::move(record));
    }
    if (manifest.frames.empty())
        throw Error(ErrorKind::EmptyDataset, path + ": no frames");
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    Json doc;
    doc["camera"] = camera_to_json(manifest.camera);
    Json frames = Json::array();
    for (const FrameRecord& record : manifest.frames) {
        Json entry;
        entry["frame_id"] = record.frame_id;
        const Quat q = rotmat_to_quat(record.gt_pose.rotation);
        entry["q"] = Json::array({q.w(), q.x(), q.y(), q.z()});
        entry["t"] = Json::array({record.gt_pose.translation.x(), record.gt_pose.translation.y(),
                                  record.gt_pose.translation.z()});
        if (record.bbox) entry["bbox"] = bbox_to_json(*record.bbox);
        frames.push_back(std::move(entry));
    }
    doc["frames"] = std::move(frames);
    write_file(path, doc.dump(2) + "\n");
}

std::map<std::string, BBox> load_bboxes(const std::string& path, const CameraModel& cam,
                                        std::vector<std::string>* warnings) {
    std::map<std::string, BBox> boxes;
    for_each_record_line(path, [&](const Json& obj, const std::string& context) {
        const Json& id = require_field(obj, "frame_id", context);
        const std::string frame_id = id.is_string() ? id.get<std::string>() : id.dump();
        const auto b = require_numbers(obj, "bbox", 4, context);
        const BBox box = sanitize_bbox(bbox_from_numbers(b), cam, context, warnings);
        if (!boxes.emplace(frame_id, box).second)
            throw Error(ErrorKind::ValidationError,
                        context + ": duplicate frame_id '" + frame_id + "'");
    });
    return boxes;
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
    std::vector<PredictionRecord> records;
    for_each_record_line(path, [&](const Json& obj, const std::string& context) {
        PredictionRecord record;
        const Json& id = require_field(obj, "frame_id", context);
        record.frame_id = id.is_string() ? id.get<std::string>() : id.dump();
        const bool has_targets = obj.contains("targets");
        const bool has_pose = obj.contains("pose");
        if (has_targets == has_pose)
            throw Error(ErrorKind::SchemaError,
                        context + ": record must carry exactly one of 'targets' or 'pose'");
        if (has_targets)
            record.targets = targets_from_json(obj["targets"], context);
        else
            record.pose = pose_from_json(obj["pose"], context);
        records.push_back(std::move(record));
    });
    return records;
}

void save_predictions(const std::vector<PredictionRecord>& records, const std::string& path) {
    std::ostringstream out;
    for (const PredictionRecord& record : records) {
        Json obj;
        obj["frame_id"] = record.frame_id;
        if (record.targets.has_value() == record.pose.has_value())
            throw Error(ErrorKind::Internal,
                        "prediction record for '" + record.frame_id + "' must carry one payload");
        if (record.targets)
            obj["targets"] = targets_to_json(*record.targets);
        else
            obj["pose"] = pose_to_json(*record.pose);
        out << obj.dump() << "\n";
    }
    write_file(path, out.str());
}

void save_report(const MetricsReport& report, const std::string& path) {
    Json summary;
    summary["mean_et_m"] = report.mean_et_m;
    summary["mean_er_deg"] = report.mean_er_deg;
    summary["evaluated"] = report.evaluated;
    summary["skipped"] = report.skipped;
    summary["failed"] = report.failed;
    if (report.mean_rotation_loss) summary["mean_rotation_loss"] = *report.mean_rotation_loss;
    if (report.mean_translation_loss)
        summary["mean_translation_loss"] = *report.mean_translation_loss;
    if (report.mean_total_loss) summary["mean_total_loss"] = *report.mean_total_loss;

    Json frames = Json::array();
    for (const FrameScore& score : report.frames)
        frames.push_back(Json{{"frame_id", score.frame_id},
                              {"et_m", score.et_m},
                              {"er_deg", score.er_deg}});

    Json doc;
    doc["summary"] = std::move(summary);
    doc["frames"] = std::move(frames);
    doc["skipped_frames"] = report.skipped_frames;
    doc["failed_frames"] = report.failed_frames;
    write_file(path, doc.dump(2) + "\n");
}

MetricsReport load_report(const std::string& path) {
    const Json doc = parse_json(read_file(path), path);
    MetricsReport report;
    const Json& summary = require_field(doc, "summary", path);
    report.mean_et_m = require_number(summary, "mean_et_m", path);
    report.mean_er_deg = require_number(summary, "mean_er_deg", path);
    report.evaluated = require_field(summary, "evaluated", path).get<std::size_t>();
    report.skipped = require_field(summary, "skipped", path).get<std::size_t>();
    report.failed = require_field(summary, "failed", path).get<std::size_t>();
    if (summary.contains("mean_rotation_loss"))
        report.mean_rotation_loss = summary["mean_rotation_loss"].get<double>();
    if (summary.contains("mean_translation_loss"))
        report.mean_translation_loss = summary["mean_translation_loss"].get<double>();
    if (summary.contains("mean_total_loss"))
        report.mean_total_loss = summary["mean_total_loss"].get<double>();
    for (const Json& entry : require_field(doc, "frames", path)) {
        FrameScore score;
        const Json& id = require_field(entry, "frame_id", path);
        score.frame_id = id.get<std::string>();
        score.et_m = require_number(entry, "et_m", path);
        score.er_deg = require_number(entry, "er_deg", path);
        report.frames.push_back(std::move(score));
    }
    if (doc.contains("skipped_frames"))
        report.skipped_frames = doc["skipped_frames"].get<std::vector<std::string>>();
    if (doc.contains("failed_frames"))
        report.failed_frames = doc["failed_frames"].get<std::vector<std::string>>();
    return report;
}

std::string render_report(const MetricsReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(24) << "frame_id" << std::right << std::setw(16) << "E_T [m]"
        << std::setw(16) << "E_R [deg]" << "\n";
    out << std::string(56, '-') << "\n";
    out << std::setprecision(9);
    for (const FrameScore& score : report.frames) {
        out << std::left << std::setw(24) << score.frame_id << std::right << std::setw(16)
            << score.et_m << std::setw(16) << score.er_deg << "\n";
    }
    out << std::string(56, '-') << "\n";
    out << "frames evaluated: " << report.evaluated << "  skipped: " << report.skipped
        << "  failed: " << report.failed << "\n";
    out << "mean E_T [m]:   " << report.mean_et_m << "\n";
    out << "mean E_R [deg]: " << report.mean_er_deg << "\n";
    if (report.mean_rotation_loss)
        out << "mean rotation loss:    " << *report.mean_rotation_loss << "\n";
    if (report.mean_translation_loss)
        out << "mean translation loss: " << *report.mean_translation_loss << "\n";
    if (report.mean_total_loss) out << "mean total loss:       " << *report.mean_total_loss << "\n";
    for (const std::string& frame : report.skipped_frames) out << "skipped: " << frame << "\n";
    for (const std::string& frame : report.failed_frames) out << "failed:  " << frame << "\n";
    return out.str();
}

}  // namespace posekit
