#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "meeso/types.hpp"

namespace meeso {

/// Samples are rows of `features`. Train and test splits index into the rows.
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    int n_classes = 0;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;

    std::size_t n_samples() const noexcept { return labels.size(); }
    std::size_t n_features() const noexcept { return static_cast<std::size_t>(features.cols()); }

    /// Rows selected by `indices` (one row per sample).
    Eigen::MatrixXd rows(const std::vector<std::size_t>& indices) const;
    std::vector<int> labels_of(const std::vector<std::size_t>& indices) const;

    bool operator==(const Dataset& o) const {
        return features == o.features && labels == o.labels && n_classes == o.n_classes &&
               train_indices == o.train_indices && test_indices == o.test_indices;
    }
};

std::vector<std::string> validate_dataset(const Dataset& d);

/// Stratified seeded split; every class keeps at least one training sample.
void split_dataset(Dataset& d, double test_fraction, std::int64_t seed);

struct BlobOptions {
    std::size_t n_samples = 400;
    std::size_t n_features = 10;
    double mean_offset = 1.0;  ///< class 0 centered at -offset, class 1 at +offset
    double sigma = 0.5;
    double test_fraction = 0.25;
};

/// Two Gaussian blobs, balanced classes, seeded.
Dataset make_two_blobs(std::int64_t seed, const BlobOptions& opts = {});

/// Comma-separated rows: features then an integer label in the last column.
Dataset load_csv(const std::filesystem::path& path, bool has_header, std::int64_t split_seed,
                 double test_fraction = 0.25);

/// Per-feature train statistics are used throughout; test rows are never inspected.
Dataset preprocess(const Dataset& d, Preprocessing mode, std::int64_t seed);

}  // namespace meeso
