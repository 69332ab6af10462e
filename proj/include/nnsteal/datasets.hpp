#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "nnsteal/train.hpp"

namespace nnsteal::attack {

// Byte-format violations are reported with the offending byte offset.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& msg, int64_t byte_offset)
        : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}
    int64_t byte_offset() const { return byte_offset_; }

private:
    int64_t byte_offset_;
};

struct BlobConfig {
    Shape input_shape{8, 8, 3};
    int num_classes = 4;
    int n_train = 400;
    int n_val = 0;
    int n_test = 200;
    double noise = 0.12;   // per-pixel Gaussian sigma around the class template
    uint64_t seed = 7;
};

// Synthetic class-template blobs: one random template image per class,
// samples are the template plus Gaussian pixel noise, clamped to [0, 1].
// Labels are exactly class-balanced within each split (round-robin).
nn::LabeledDataset load_synthetic_blobs(const BlobConfig& cfg);

// Raw candidate inputs from the same generator (no labels); used as the
// membership-inference query pool.
std::vector<Tensor> sample_blob_pool(const BlobConfig& cfg, int n, uint64_t seed);

// CIFAR-10 binary batch: records of 3073 bytes (label byte, then 3072
// channel-major pixel bytes). Pixels are scaled to [0, 1].
nn::LabeledDataset load_cifar10_binary(const std::filesystem::path& path, nn::Split split);

// IDX image + label pair (magic 0x00000803 / 0x00000801, big-endian dims).
nn::LabeledDataset load_idx(const std::filesystem::path& images,
                            const std::filesystem::path& labels, nn::Split split);

// Membership rule: member iff max(posterior) > threshold.
bool membership_test(std::span<const double> posterior, double threshold);

// Queries the target on every pool input and keeps those passing the
// membership test, labeled with the full target posterior (soft labels).
// An empty result is returned with a stderr warning, not an error.
nn::LabeledDataset reconstruct_training_set(const nn::TrainedNetwork& target,
                                            std::span<const Tensor> candidate_pool,
                                            double threshold);

// Dataset persistence: JSON header plus a little-endian f64 blob holding the
// inputs and (when present) the soft labels.
void save_labeled_dataset(const nn::LabeledDataset& ds, const std::filesystem::path& path);
nn::LabeledDataset load_labeled_dataset(const std::filesystem::path& path);

}  // namespace nnsteal::attack
