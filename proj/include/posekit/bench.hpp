#pragma once

#include <functional>
#include <string>
#include <vector>

#include "posekit/errors.hpp"

namespace posekit {

enum class StageSource { Measured, Configured };

// One pipeline stage's latency statistics, milliseconds.
struct StageProfile {
    std::string name;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    StageSource source = StageSource::Configured;
};

struct ThroughputReport {
    double sequential_latency_ms = 0.0;
    double sequential_fps = 0.0;
    double pipelined_fps = 0.0;
    std::string bottleneck;
};

// Closed-form throughput from stage means: sequential latency is the sum,
// pipelined rate is set by the slowest stage. Ties pick the first stage.
// Throws EmptyPipeline on no stages, ValidationError on a non-positive mean
// or negative std.
ThroughputReport model_throughput(const std::vector<StageProfile>& stages);

// A stage to time: a name and a callable doing the work.
struct StageRunner {
    std::string name;
    std::function<void()> run;
};

// Wall-clock mean and sample std per stage over `repetitions` timed runs,
// after `warmup` untimed runs. Monotonic clock. std is 0 for a single
// repetition. Throws ValidationError when repetitions < 1.
std::vector<StageProfile> measure_stages(const std::vector<StageRunner>& stages,
                                         std::size_t repetitions, std::size_t warmup);

enum class ScheduleMode { Sequential, Pipelined };

struct SimulationOptions {
    bool sample_jitter = false;  // draw latencies from N(mean, std) truncated at 0
    std::uint64_t seed = 0;
};

// Logical-time simulation of n_frames through the stages, one executor per
// stage. Sequential mode admits a frame only after the previous one leaves;
// pipelined mode lets each stage pick up frame i+1 as soon as it is free.
// With jitter off the sequential makespan is exactly n * sum(means). Returns
// the makespan in ms. Throws EmptyPipeline / ValidationError as above.
double simulate_schedules(const std::vector<StageProfile>& stages, std::size_t n_frames,
                          ScheduleMode mode, const SimulationOptions& options = {});

// Profile file: {"description": ..., "stages": [{"name", "mean_ms",
// "std_ms", "source"}]}. source is "measured" or "configured".
std::vector<StageProfile> load_profile(const std::string& path);
void save_profile(const std::vector<StageProfile>& stages, const std::string& path,
                  const std::string& description = "");

}  // namespace posekit
