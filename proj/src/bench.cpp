#include "posekit/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "posekit/rng.hpp"

namespace posekit {

namespace {

using Json = nlohmann::ordered_json;

void validate_stages(const std::vector<StageProfile>& stages) {
    if (stages.empty()) throw Error(ErrorKind::EmptyPipeline, "no stages");
    for (const StageProfile& stage : stages) {
        if (!(stage.mean_ms > 0.0))
            throw Error(ErrorKind::ValidationError,
                        "stage '" + stage.name + "' mean must be > 0 ms");
        if (stage.std_ms < 0.0)
            throw Error(ErrorKind::ValidationError, "stage '" + stage.name + "' std must be >= 0");
    }
}

double sample_latency(const StageProfile& stage, Rng& rng) {
    if (stage.std_ms == 0.0) return stage.mean_ms;
    // Truncation at 0 by rejection; mean > 0 makes each draw succeed with
    // probability above one half.
    while (true) {
        const double value = stage.mean_ms + stage.std_ms * rng.normal();
        if (value > 0.0) return value;
    }
}

}  // namespace

ThroughputReport model_throughput(const std::vector<StageProfile>& stages) {
    validate_stages(stages);
    ThroughputReport report;
    double total = 0.0;
    double slowest = 0.0;
    for (const StageProfile& stage : stages) {
        total += stage.mean_ms;
        if (stage.mean_ms > slowest) {
            slowest = stage.mean_ms;
            report.bottleneck = stage.name;
        }
    }
    report.sequential_latency_ms = total;
    report.sequential_fps = 1000.0 / total;
    report.pipelined_fps = 1000.0 / slowest;
    return report;
}

std::vector<StageProfile> measure_stages(const std::vector<StageRunner>& stages,
                                         std::size_t repetitions, std::size_t warmup) {
    if (repetitions < 1) throw Error(ErrorKind::ValidationError, "repetitions must be >= 1");
    if (stages.empty()) throw Error(ErrorKind::EmptyPipeline, "no stages");
    using Clock = std::chrono::steady_clock;
    std::vector<StageProfile> profiles;
    profiles.reserve(stages.size());
    for (const StageRunner& stage : stages) {
        for (std::size_t i = 0; i < warmup; ++i) stage.run();
        std::vector<double> samples;
        samples.reserve(repetitions);
        for (std::size_t i = 0; i < repetitions; ++i) {
            const auto start = Clock::now();
            stage.run();
            const auto stop = Clock::now();
            samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        }
        double mean = 0.0;
        for (double s : samples) mean += s;
        mean /= static_cast<double>(samples.size());
        double var = 0.0;
        if (samples.size() > 1) {
            for (double s : samples) var += (s - mean) * (s - mean);
            var /= static_cast<double>(samples.size() - 1);
        }
        profiles.push_back({stage.name, mean, std::sqrt(var), StageSource::Measured});
    }
    return profiles;
}

double simulate_schedules(const std::vector<StageProfile>& stages, std::size_t n_frames,
                          ScheduleMode mode, const SimulationOptions& options) {
    validate_stages(stages);
    if (n_frames < 1) throw Error(ErrorKind::ValidationError, "n_frames must be >= 1");

    if (!options.sample_jitter && mode == ScheduleMode::Sequential) {
        double total = 0.0;
        for (const StageProfile& stage : stages) total += stage.mean_ms;
        return static_cast<double>(n_frames) * total;
    }

    Rng rng(options.seed);
    auto latency = [&](const StageProfile& stage) {
        return options.sample_jitter ? sample_latency(stage, rng) : stage.mean_ms;
    };

    if (mode == ScheduleMode::Sequential) {
        double t = 0.0;
        for (std::size_t frame = 0; frame < n_frames; ++frame)
            for (const StageProfile& stage : stages) t += latency(stage);
        return t;
    }

    // One executor per stage: stage s starts frame i at
    // max(finish[s-1] of frame i, finish[s] of frame i-1).
    std::vector<double> done(stages.size(), 0.0);
    for (std::size_t frame = 0; frame < n_frames; ++frame) {
        double upstream = 0.0;
        for (std::size_t s = 0; s < stages.size(); ++s) {
            const double start = std::max(upstream, done[s]);
            done[s] = start + latency(stages[s]);
            upstream = done[s];
        }
    }
    return done.back();
}

std::vector<StageProfile> load_profile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("stages") || !doc["stages"].is_array())
        throw Error(ErrorKind::SchemaError, path + ": expected an object with a 'stages' array");
    std::vector<StageProfile> stages;
    for (const Json& entry : doc["stages"]) {
        if (!entry.is_object() || !entry.contains("name") || !entry.contains("mean_ms"))
            throw Error(ErrorKind::SchemaError, path + ": stage needs 'name' and 'mean_ms'");
        StageProfile stage;
        stage.name = entry["name"].get<std::string>();
        stage.mean_ms = entry["mean_ms"].get<double>();
        if (entry.contains("std_ms")) stage.std_ms = entry["std_ms"].get<double>();
        if (entry.contains("source")) {
            const std::string source = entry["source"].get<std::string>();
            if (source == "measured")
                stage.source = StageSource::Measured;
            else if (source == "configured")
                stage.source = StageSource::Configured;
            else
                throw Error(ErrorKind::SchemaError,
                            path + ": source must be 'measured' or 'configured'");
        }
        stages.push_back(std::move(stage));
    }
    validate_stages(stages);
    return stages;
}

void save_profile(const std::vector<StageProfile>& stages, const std::string& path,
                  const std::string& description) {
    Json doc;
    if (!description.empty()) doc["description"] = description;
    Json list = Json::array();
    for (const StageProfile& stage : stages)
        list.push_back(Json{{"name", stage.name},
                            {"mean_ms", stage.mean_ms},
                            {"std_ms", stage.std_ms},
                            {"source", stage.source == StageSource::Measured ? "measured"
                                                                             : "configured"}});
    doc["stages"] = std::move(list);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace posekit
