#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "posekit/augmentation.hpp"
#include "posekit/bench.hpp"
#include "posekit/crop_targets.hpp"
#include "posekit/dataset_io.hpp"
#include "posekit/errors.hpp"
#include "posekit/geometry.hpp"
#include "posekit/metrics.hpp"
#include "posekit/pipeline.hpp"

using namespace posekit;

namespace {

// Fixed default so every run is reproducible without flags.
constexpr std::uint64_t kDefaultSeed = 1729;

// 0 success, 1 validation/usage, 2 data error, 3 internal.
int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SpecError:
        case ErrorKind::EmptyPipeline:
            return 1;
        case ErrorKind::Internal:
            return 3;
        default:
            return 2;
    }
}

struct ManifestArgs {
    std::string annotations;
    std::string camera_path;
    std::string schema_path;
    double alpha = 0.0;  // 0 keeps the camera's value
};

void add_manifest_args(CLI::App* cmd, ManifestArgs& args, bool with_alpha = true) {
    cmd->add_option("--annotations", args.annotations,
                    "Ground-truth annotation document (JSON)")
        ->required();
    cmd->add_option("--camera", args.camera_path,
                    "Camera config (JSON); overrides any camera embedded in the annotations");
    cmd->add_option("--schema", args.schema_path,
                    "Field-name schema config for foreign annotation layouts (JSON)");
    if (with_alpha)
        cmd->add_option("--alpha", args.alpha,
                        "Override the camera's full-image aspect correction factor");
}

DatasetManifest load_manifest(const ManifestArgs& args) {
    AnnotationSchema schema;
    if (!args.schema_path.empty()) schema = load_schema(args.schema_path);
    std::optional<CameraModel> camera;
    if (!args.camera_path.empty()) camera = load_camera(args.camera_path);
    DatasetManifest manifest = load_annotations(args.annotations, schema, camera);
    if (args.alpha != 0.0) {
        manifest.camera.alpha = args.alpha;
        validate_camera(manifest.camera);
    }
    for (const std::string& warning : manifest.warnings)
        std::cerr << "warning: " << warning << "\n";
    return manifest;
}

struct BBoxSourceArg {
    BBoxSource source = BBoxSource::GroundTruth;
    std::string file;
};

BBoxSourceArg parse_bbox_source(const std::string& text) {
    if (text == "gt") return {BBoxSource::GroundTruth, ""};
    if (text == "perturbed") return {BBoxSource::Perturbed, ""};
    if (text.rfind("file:", 0) == 0 && text.size() > 5)
        return {BBoxSource::File, text.substr(5)};
    throw Error(ErrorKind::SpecError,
                "--bbox-source must be gt, perturbed, or file:<path> (got '" + text + "')");
}

void cmd_encode(const ManifestArgs& m, const std::string& boxes_path, const std::string& out) {
    const DatasetManifest manifest = load_manifest(m);
    std::map<std::string, BBox> file_boxes;
    if (!boxes_path.empty()) {
        std::vector<std::string> warnings;
        file_boxes = load_bboxes(boxes_path, manifest.camera, &warnings);
        for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    }
    std::vector<PredictionRecord> records;
    std::size_t skipped = 0;
    for (const FrameRecord& frame : manifest.frames) {
        std::optional<BBox> box = frame.bbox;
        if (!boxes_path.empty()) {
            auto it = file_boxes.find(frame.frame_id);
            box = it == file_boxes.end() ? std::nullopt : std::optional<BBox>(it->second);
        }
        if (!box) {
            ++skipped;
            std::cerr << "warning: no box for frame '" << frame.frame_id << "', skipped\n";
            continue;
        }
        PredictionRecord record;
        record.frame_id = frame.frame_id;
        record.targets = encode_pose(frame.gt_pose, manifest.camera, *box);
        records.push_back(std::move(record));
    }
    if (records.empty()) throw Error(ErrorKind::EmptyDataset, "no frame had a usable box");
    save_predictions(records, out);
    std::cout << "encoded " << records.size() << " frames (" << skipped << " skipped) -> " << out
              << "\n";
}

void cmd_decode(const std::string& targets_path, const std::string& camera_path, double alpha,
                const std::string& boxes_path, const std::string& out) {
    CameraModel cam = load_camera(camera_path);
    if (alpha != 0.0) {
        cam.alpha = alpha;
        validate_camera(cam);
    }
    std::vector<std::string> warnings;
    const std::map<std::string, BBox> boxes = load_bboxes(boxes_path, cam, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

    const std::vector<PredictionRecord> records = load_predictions(targets_path);
    DatasetManifest decoded;
    decoded.camera = cam;
    std::size_t skipped = 0;
    for (const PredictionRecord& record : records) {
        FrameRecord frame;
        frame.frame_id = record.frame_id;
        if (record.pose) {
            frame.gt_pose = *record.pose;
        } else {
            auto it = boxes.find(record.frame_id);
            if (it == boxes.end()) {
                ++skipped;
                std::cerr << "warning: no box for frame '" << record.frame_id << "', skipped\n";
                continue;
            }
            frame.gt_pose = decode_pose(*record.targets, cam, it->second);
            frame.bbox = it->second;
        }
        decoded.frames.push_back(std::move(frame));
    }
    if (decoded.frames.empty()) throw Error(ErrorKind::EmptyDataset, "nothing decoded");
    save_manifest(decoded, out);
    std::cout << "decoded " << decoded.frames.size() << " frames (" << skipped << " skipped) -> "
              << out << "\n";
}

void cmd_augment(const ManifestArgs& m, std::optional<double> theta_deg,
                 const std::string& policy_path, std::uint64_t seed, const std::string& out) {
    DatasetManifest manifest = load_manifest(m);
    const CameraModel& cam = manifest.camera;

    if (theta_deg) {
        const double theta = deg_to_rad(*theta_deg);
        for (FrameRecord& frame : manifest.frames) {
            frame.gt_pose = relabel_pose(frame.gt_pose, theta);
            if (frame.bbox) frame.bbox = relabel_bbox(*frame.bbox, theta, cam);
        }
    } else {
        AugmentationPolicy policy = load_policy(policy_path);
        const Rng base(seed);
        for (FrameRecord& frame : manifest.frames) {
            Rng rng = base.split(frame.frame_id);
            const std::optional<double> theta = sample_augmentation(policy, rng);
            if (theta) {
                frame.gt_pose = relabel_pose(frame.gt_pose, *theta);
                if (frame.bbox) frame.bbox = relabel_bbox(*frame.bbox, *theta, cam);
            }
            if (frame.bbox)
                frame.bbox = perturb_bbox(*frame.bbox, cam, rng, policy.bbox_perturb_frac);
        }
    }
    save_manifest(manifest, out);
    std::cout << "relabeled " << manifest.frames.size() << " frames -> " << out << "\n";
}

void cmd_eval(const ManifestArgs& m, const std::string& predictions_path, double noise_u,
              double noise_r_deg, const std::string& bbox_source_text, double perturb_frac,
              std::uint64_t seed, const std::string& out, const std::string& pred_out) {
    const DatasetManifest manifest = load_manifest(m);
    const BBoxSourceArg source = parse_bbox_source(bbox_source_text);

    PipelineConfig config;
    config.bbox_source = source.source;
    config.bbox_perturb_frac = perturb_frac;
    config.seed = seed;
    if (source.source == BBoxSource::File) {
        std::vector<std::string> warnings;
        config.file_boxes = load_bboxes(source.file, manifest.camera, &warnings);
        for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    }

    std::unique_ptr<Predictor> predictor;
    if (!predictions_path.empty()) {
        if (noise_u != 0.0 || noise_r_deg != 0.0)
            throw Error(ErrorKind::SpecError,
                        "--noise-u/--noise-r-deg apply to the oracle, not --predictions");
        predictor = std::make_unique<FilePredictor>(load_predictions(predictions_path), manifest);
    } else {
        predictor = std::make_unique<OracleNoisyPredictor>(manifest, noise_u,
                                                           deg_to_rad(noise_r_deg), seed);
    }

    const PipelineResult result = run_pipeline(manifest, *predictor, config);
    std::cout << render_report(result.report);
    if (!out.empty()) {
        save_report(result.report, out);
        std::cout << "report -> " << out << "\n";
    }
    if (!pred_out.empty()) {
        save_predictions(result.predictions, pred_out);
        std::cout << "predictions -> " << pred_out << "\n";
    }
}

void cmd_check_derivation(const std::string& camera_path, std::optional<double> theta_deg,
                          std::size_t sweep) {
    CameraModel cam{3000.0, 3000.0, 960.0, 600.0, 1920.0, 1200.0, 1.6};
    if (!camera_path.empty()) cam = load_camera(camera_path);

    std::cout << std::setprecision(6);
    if (theta_deg) {
        const double dev = conjugation_check(cam, deg_to_rad(*theta_deg));
        std::cout << "theta " << *theta_deg << " deg: |K^-1 M K - Rz|_max = " << dev << "\n";
        return;
    }
    if (sweep == 0) throw Error(ErrorKind::SpecError, "--sweep must be >= 1");
    double max_dev = 0.0;
    double max_theta = 0.0;
    std::cout << "theta [deg]    |K^-1 M K - Rz|_max\n";
    for (std::size_t k = 0; k < sweep; ++k) {
        const double deg = 360.0 * static_cast<double>(k) / static_cast<double>(sweep);
        const double dev = conjugation_check(cam, deg_to_rad(deg));
        if (dev > max_dev) {
            max_dev = dev;
            max_theta = deg;
        }
        if (k % (sweep / 8 == 0 ? 1 : sweep / 8) == 0)
            std::cout << std::left << std::setw(15) << deg << dev << "\n";
    }
    std::cout << "max over " << sweep << " samples: " << max_dev << " (at theta = " << max_theta
              << " deg)\n";
}

void print_throughput(const std::vector<StageProfile>& stages) {
    const ThroughputReport report = model_throughput(stages);
    std::cout << std::setprecision(6);
    std::cout << "stage            mean [ms]   std [ms]   source\n";
    for (const StageProfile& stage : stages)
        std::cout << std::left << std::setw(17) << stage.name << std::setw(12) << stage.mean_ms
                  << std::setw(11) << stage.std_ms
                  << (stage.source == StageSource::Measured ? "measured" : "configured") << "\n";
    std::cout << "sequential latency: " << report.sequential_latency_ms << " ms\n";
    std::cout << "sequential rate:    " << report.sequential_fps << " FPS\n";
    std::cout << "pipelined rate:     " << report.pipelined_fps << " FPS (bottleneck: "
              << report.bottleneck << ")\n";
}

void cmd_bench(const std::string& profile_path, std::size_t live_frames, std::size_t reps,
               std::size_t warmup, std::size_t simulate_frames, bool jitter, std::uint64_t seed,
               const std::string& out) {
    if (profile_path.empty() == (live_frames == 0))
        throw Error(ErrorKind::SpecError, "pass exactly one of --profile or --live");

    std::vector<StageProfile> stages;
    if (!profile_path.empty()) {
        stages = load_profile(profile_path);
    } else {
        // Self-contained live pipeline over a synthetic manifest.
        SyntheticSpec spec;
        spec.count = live_frames;
        spec.seed = seed;
        DatasetManifest manifest = generate_synthetic(spec);
        std::vector<PredictionRecord> encoded;
        DatasetManifest decoded = manifest;
        std::vector<PosePair> pairs;
        std::vector<StageRunner> runners;
        runners.push_back({"generate", [&] { manifest = generate_synthetic(spec); }});
        runners.push_back({"encode", [&] {
                               encoded.clear();
                               for (const FrameRecord& f : manifest.frames)
                                   encoded.push_back(
                                       {f.frame_id,
                                        encode_pose(f.gt_pose, manifest.camera, *f.bbox),
                                        std::nullopt});
                           }});
        runners.push_back({"decode", [&] {
                               for (std::size_t i = 0; i < encoded.size(); ++i)
                                   decoded.frames[i].gt_pose =
                                       decode_pose(*encoded[i].targets, manifest.camera,
                                                   *manifest.frames[i].bbox);
                           }});
        runners.push_back({"score", [&] {
                               pairs.clear();
                               for (std::size_t i = 0; i < decoded.frames.size(); ++i)
                                   pairs.push_back({decoded.frames[i].gt_pose,
                                                    manifest.frames[i].gt_pose});
                               aggregate(pairs);
                           }});
        stages = measure_stages(runners, reps, warmup);
    }

    print_throughput(stages);

    if (simulate_frames > 0) {
        SimulationOptions options;
        options.sample_jitter = jitter;
        options.seed = seed;
        const double seq = simulate_schedules(stages, simulate_frames, ScheduleMode::Sequential,
                                              options);
        const double pip = simulate_schedules(stages, simulate_frames, ScheduleMode::Pipelined,
                                              options);
        const double n = static_cast<double>(simulate_frames);
        std::cout << "simulated " << simulate_frames << " frames"
                  << (jitter ? " (jittered latencies)" : "") << ":\n";
        std::cout << "  sequential makespan: " << seq << " ms (" << 1000.0 * n / seq << " FPS)\n";
        std::cout << "  pipelined makespan:  " << pip << " ms (" << 1000.0 * n / pip << " FPS)\n";
    }

    if (!out.empty()) {
        const ThroughputReport report = model_throughput(stages);
        nlohmann::ordered_json doc{{"sequential_latency_ms", report.sequential_latency_ms},
                                   {"sequential_fps", report.sequential_fps},
                                   {"pipelined_fps", report.pipelined_fps},
                                   {"bottleneck", report.bottleneck}};
        std::ofstream file(out, std::ios::binary | std::ios::trunc);
        if (!file) throw Error(ErrorKind::IoError, "cannot write " + out);
        file << doc.dump(2) << "\n";
        std::cout << "throughput report -> " << out << "\n";
    }
}

void cmd_gen_synthetic(const SyntheticSpec& spec, const std::string& camera_path, double alpha,
                       const std::string& out) {
    SyntheticSpec resolved = spec;
    if (!camera_path.empty()) resolved.camera = load_camera(camera_path);
    if (alpha != 0.0) resolved.camera.alpha = alpha;
    const DatasetManifest manifest = generate_synthetic(resolved);
    save_manifest(manifest, out);
    std::cout << "generated " << manifest.frames.size() << " frames -> " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crop-normalized 6DoF pose toolkit: target encoding, augmentation relabeling, "
                 "evaluation, and throughput modeling"};
    app.require_subcommand(1);

    // encode
    ManifestArgs enc_m;
    std::string enc_boxes, enc_out;
    auto* enc = app.add_subcommand("encode", "Annotations + boxes -> crop-normalized targets");
    add_manifest_args(enc, enc_m);
    enc->add_option("--boxes", enc_boxes,
                    "Box file (JSON lines); replaces the boxes embedded in the annotations");
    enc->add_option("--out", enc_out, "Output target records (JSON lines)")->required();
    enc->callback([&] { cmd_encode(enc_m, enc_boxes, enc_out); });

    // decode
    std::string dec_targets, dec_camera, dec_boxes, dec_out;
    double dec_alpha = 0.0;
    auto* dec = app.add_subcommand("decode", "Targets + boxes -> full-frame poses");
    dec->add_option("--targets", dec_targets, "Target records (JSON lines)")->required();
    dec->add_option("--camera", dec_camera, "Camera config (JSON)")->required();
    dec->add_option("--boxes", dec_boxes, "Box file (JSON lines)")->required();
    dec->add_option("--alpha", dec_alpha, "Override the camera's aspect correction factor");
    dec->add_option("--out", dec_out, "Output pose document (annotation format)")->required();
    dec->callback([&] { cmd_decode(dec_targets, dec_camera, dec_alpha, dec_boxes, dec_out); });

    // augment
    ManifestArgs aug_m;
    std::string aug_policy, aug_out;
    double aug_theta = 0.0;
    bool aug_theta_set = false;
    std::uint64_t aug_seed = kDefaultSeed;
    auto* aug = app.add_subcommand(
        "augment", "Relabel poses and boxes for an in-plane rotation of the image");
    add_manifest_args(aug, aug_m, /*with_alpha=*/false);
    auto* theta_opt = aug->add_option("--theta", aug_theta,
                                      "Fixed rotation angle in degrees (deterministic)");
    aug->add_option("--policy", aug_policy, "Stochastic policy config (JSON)");
    aug->add_option("--seed", aug_seed, "Random seed for --policy (default 1729)");
    aug->add_option("--out", aug_out, "Output annotation document")->required();
    aug->callback([&] {
        aug_theta_set = theta_opt->count() > 0;
        if (aug_theta_set == !aug_policy.empty())
            throw Error(ErrorKind::SpecError, "pass exactly one of --theta or --policy");
        cmd_augment(aug_m, aug_theta_set ? std::optional<double>(aug_theta) : std::nullopt,
                    aug_policy, aug_seed, aug_out);
    });

    // eval
    ManifestArgs ev_m;
    std::string ev_predictions, ev_bbox_source = "gt", ev_out, ev_pred_out;
    double ev_noise_u = 0.0, ev_noise_r_deg = 0.0, ev_perturb_frac = 0.10;
    std::uint64_t ev_seed = kDefaultSeed;
    auto* ev = app.add_subcommand(
        "eval", "Score a prediction file or the built-in noisy oracle against ground truth");
    add_manifest_args(ev, ev_m);
    ev->add_option("--predictions", ev_predictions,
                   "Prediction records (JSON lines); omit to run the oracle");
    ev->add_option("--noise-u", ev_noise_u,
                   "Oracle: gaussian std added per target component (default 0)");
    ev->add_option("--noise-r-deg", ev_noise_r_deg,
                   "Oracle: gaussian std of a random-axis rotation, degrees (default 0)");
    ev->add_option("--bbox-source", ev_bbox_source,
                   "Box source: gt, perturbed, or file:<path> (default gt)");
    ev->add_option("--perturb-frac", ev_perturb_frac,
                   "Per-side box perturbation fraction for --bbox-source perturbed "
                   "(default 0.10)");
    ev->add_option("--seed", ev_seed, "Random seed (default 1729)");
    ev->add_option("--out", ev_out, "Write the report (JSON)");
    ev->add_option("--pred-out", ev_pred_out, "Write the produced predictions (JSON lines)");
    ev->callback([&] {
        cmd_eval(ev_m, ev_predictions, ev_noise_u, ev_noise_r_deg, ev_bbox_source,
                 ev_perturb_frac, ev_seed, ev_out, ev_pred_out);
    });

    // check-derivation
    std::string chk_camera;
    double chk_theta = 0.0;
    std::size_t chk_sweep = 360;
    auto* chk = app.add_subcommand(
        "check-derivation",
        "Deviation of K^-1 M(theta) K from Rz(theta) for a camera (0 for an ideal one)");
    chk->add_option("--camera", chk_camera,
                    "Camera config (JSON); default is an ideal centered camera");
    auto* chk_theta_opt =
        chk->add_option("--theta", chk_theta, "Check a single angle (degrees)");
    chk->add_option("--sweep", chk_sweep, "Number of sweep samples over [0, 360) (default 360)");
    chk->callback([&] {
        cmd_check_derivation(chk_camera,
                             chk_theta_opt->count() > 0 ? std::optional<double>(chk_theta)
                                                        : std::nullopt,
                             chk_sweep);
    });

    // bench
    std::string bench_profile, bench_out;
    std::size_t bench_live = 0, bench_reps = 20, bench_warmup = 3, bench_sim = 0;
    bool bench_jitter = false;
    std::uint64_t bench_seed = kDefaultSeed;
    auto* bench = app.add_subcommand(
        "bench", "Throughput model and schedule simulation from a stage profile");
    bench->add_option("--profile", bench_profile, "Stage profile (JSON)");
    bench->add_option("--live", bench_live,
                      "Measure a live synthetic pipeline of this many frames instead of "
                      "loading a profile");
    bench->add_option("--reps", bench_reps, "Timed repetitions for --live (default 20)");
    bench->add_option("--warmup", bench_warmup, "Discarded warmup runs for --live (default 3)");
    bench->add_option("--simulate", bench_sim, "Also simulate this many frames through both "
                                               "schedules");
    bench->add_flag("--jitter", bench_jitter,
                    "Sample simulated latencies from N(mean, std) truncated at 0");
    bench->add_option("--seed", bench_seed, "Random seed for --jitter (default 1729)");
    bench->add_option("--out", bench_out, "Write the throughput report (JSON)");
    bench->callback([&] {
        cmd_bench(bench_profile, bench_live, bench_reps, bench_warmup, bench_sim, bench_jitter,
                  bench_seed, bench_out);
    });

    // gen-synthetic
    SyntheticSpec gen_spec;
    gen_spec.seed = kDefaultSeed;
    std::string gen_camera, gen_out;
    double gen_alpha = 0.0;
    auto* gen = app.add_subcommand("gen-synthetic", "Generate a random synthetic manifest");
    gen->add_option("--count", gen_spec.count, "Number of frames")->required();
    gen->add_option("--z-min", gen_spec.z_min, "Minimum depth, meters (default 1, floor 1)");
    gen->add_option("--z-max", gen_spec.z_max, "Maximum depth, meters (default 10)");
    gen->add_option("--camera", gen_camera, "Camera config (JSON); default is a 1920x1200 rig");
    gen->add_option("--alpha", gen_alpha, "Override the camera's aspect correction factor");
    gen->add_option("--box-w", gen_spec.box_width, "Ground-truth box width, px (default 220)");
    gen->add_option("--box-h", gen_spec.box_height, "Ground-truth box height, px (default 180)");
    gen->add_option("--box-dx", gen_spec.box_offset_x,
                    "Box center offset from the projection, px (default 18)");
    gen->add_option("--box-dy", gen_spec.box_offset_y,
                    "Box center offset from the projection, px (default -12)");
    gen->add_option("--seed", gen_spec.seed, "Random seed (default 1729)");
    gen->add_option("--out", gen_out, "Output annotation document")->required();
    gen->callback([&] { cmd_gen_synthetic(gen_spec, gen_camera, gen_alpha, gen_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
