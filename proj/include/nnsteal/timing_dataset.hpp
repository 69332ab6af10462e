#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nnsteal/archspace.hpp"
#include "nnsteal/timing.hpp"

namespace nnsteal::attack {

// One attacker-dataset record: what the adversary learns about one probe
// architecture on one piece of hardware (or one cost model).
struct TimingSample {
    std::string arch_id;
    int depth = 0;
    int64_t n_params = 0;
    double mean_time_s = 0.0;
    int n_runs = 0;
    std::string hardware_tag;  // "cm:<id>" for cost-model rows, "hw:<name>" for wall rows
};

enum class TimingMode { Wall, CostModel };

struct TimingDataset {
    std::vector<TimingSample> samples;
    TimingMode mode = TimingMode::CostModel;
    std::string cost_model_id;
    bool complete = true;  // false when some probes failed and were skipped

    size_t size() const { return samples.size(); }
};

// Cost-model dataset: n_archs architectures sampled from the space, each
// timed as the mean of n_runs simulated draws.
TimingDataset build_timing_dataset(const ArchSpace& space, int n_archs,
                                   const timing::CostModel& model, int n_runs, uint64_t seed);

// Wall-clock dataset: every probe architecture is instantiated with random
// weights and measured on the process CPU clock. Failed probes are skipped
// (logged to stderr) and the dataset is flagged incomplete.
TimingDataset build_timing_dataset_wall(const ArchSpace& space, int n_archs, int n_runs,
                                        uint64_t seed, const std::string& hardware_tag);

// Depth sweep over the fixed-width family: per_depth rows for every depth in
// [depth_min, depth_max]. Used for linearity checks and defense experiments.
TimingDataset build_depth_sweep_dataset(int depth_min, int depth_max, int per_depth, int filters,
                                        int kernel, Shape input_shape, int num_classes,
                                        const timing::CostModel& model, int n_runs);

enum class PoisonStrategy { LabelFlip, TimeShift };

// Defender-side mitigation: floor(fraction * N) rows get adversarial values.
// LabelFlip replaces the depth with a uniformly drawn wrong depth from the
// dataset's depth range; TimeShift scales the time by a random factor in
// [0.25, 4] (log-uniform). The input dataset is never mutated.
TimingDataset poison_timing_dataset(const TimingDataset& ds, double fraction,
                                    PoisonStrategy strategy, uint64_t seed);

// CSV header, exactly: arch_id,depth,n_params,mean_time_s,n_runs,hardware_tag
void write_timing_csv(const TimingDataset& ds, const std::filesystem::path& path);
TimingDataset read_timing_csv(const std::filesystem::path& path);

}  // namespace nnsteal::attack
