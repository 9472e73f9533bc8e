#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace adsim {

// Feature matrix plus integer labels. Binary problems use labels {0, 1}.
struct Dataset {
  Eigen::MatrixXd features;  // rows = samples
  std::vector<int> labels;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// Two Gaussian blobs, one per class, centered at +-separation/2 along a
// random direction. Deterministic in the seed.
Dataset make_blobs(int n_samples, int dim, std::uint64_t seed, double separation = 3.0);

// IDX files (big-endian magic + dims). Pixel values are scaled to [0, 1];
// multiclass labels are binarized by parity so the logistic problems stay
// two-class.
Dataset load_idx(const std::string& image_path, const std::string& label_path,
                 int max_samples = 0);

// CSV with a header row; the label sits in the last column.
Dataset load_csv(const std::string& path);

// Controls how local shards are carved out of the dataset: a zeta fraction is
// label-sorted and split contiguously, the rest is shuffled uniformly.
struct PartitionSpec {
  int n_agents = 1;
  double heterogeneity = 0.0;  // zeta in [0, 1]
  std::uint64_t seed = 0;
};

// Exhaustive, disjoint shards whose sizes differ by at most one.
std::vector<std::vector<int>> partition_dataset(const Dataset& dataset,
                                                const PartitionSpec& spec);

}  // namespace adsim
