#include "adsim/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "adsim/rng.hpp"
#include "adsim/types.hpp"

namespace adsim {

Dataset make_blobs(int n_samples, int dim, std::uint64_t seed, double separation) {
  if (n_samples < 2 || dim < 1) throw ConfigError("make_blobs needs >=2 samples, dim >= 1");
  RngStream rng = derive_stream(seed, "blobs");
  Eigen::VectorXd direction(dim);
  for (int j = 0; j < dim; ++j) direction(j) = rng.normal();
  direction.normalize();

  Dataset ds;
  ds.features.resize(n_samples, dim);
  ds.labels.resize(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    const int label = s % 2;  // balanced classes
    const double sign = label == 0 ? -0.5 : 0.5;
    for (int j = 0; j < dim; ++j)
      ds.features(s, j) = sign * separation * direction(j) + rng.normal();
    ds.labels[s] = label;
  }
  return ds;
}

namespace {

std::uint32_t read_be32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ConfigError("truncated IDX header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& image_path, const std::string& label_path,
                 int max_samples) {
  std::ifstream img(image_path, std::ios::binary);
  if (!img) throw ConfigError("cannot open IDX image file: " + image_path);
  std::ifstream lab(label_path, std::ios::binary);
  if (!lab) throw ConfigError("cannot open IDX label file: " + label_path);

  const std::uint32_t img_magic = read_be32(img);
  if (img_magic != 0x00000803u)
    throw ConfigError("bad IDX image magic (expected 0x00000803)");
  const int count = static_cast<int>(read_be32(img));
  const int rows = static_cast<int>(read_be32(img));
  const int cols = static_cast<int>(read_be32(img));

  const std::uint32_t lab_magic = read_be32(lab);
  if (lab_magic != 0x00000801u)
    throw ConfigError("bad IDX label magic (expected 0x00000801)");
  const int lab_count = static_cast<int>(read_be32(lab));
  if (lab_count != count) throw ConfigError("IDX image/label counts differ");

  const int take = (max_samples > 0) ? std::min(max_samples, count) : count;
  const int dim = rows * cols;
  Dataset ds;
  ds.features.resize(take, dim);
  ds.labels.resize(take);
  std::vector<unsigned char> buf(dim);
  for (int s = 0; s < take; ++s) {
    img.read(reinterpret_cast<char*>(buf.data()), dim);
    if (!img) throw ConfigError("truncated IDX image data");
    for (int j = 0; j < dim; ++j) ds.features(s, j) = buf[j] / 255.0;
    unsigned char y;
    lab.read(reinterpret_cast<char*>(&y), 1);
    if (!lab) throw ConfigError("truncated IDX label data");
    ds.labels[s] = y % 2;  // parity binarization for multiclass digits
  }
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file: " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("ragged CSV row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("CSV has a header but no data rows");
  const int m = static_cast<int>(rows.size());
  const int dim = static_cast<int>(rows.front().size()) - 1;
  if (dim < 1) throw ConfigError("CSV needs at least one feature column");

  Dataset ds;
  ds.features.resize(m, dim);
  ds.labels.resize(m);
  for (int s = 0; s < m; ++s) {
    for (int j = 0; j < dim; ++j) ds.features(s, j) = rows[s][j];
    ds.labels[s] = static_cast<int>(rows[s][dim]);
  }
  return ds;
}

namespace {

// Platform-deterministic Fisher-Yates (std::shuffle ordering is unspecified).
void shuffle_indices(std::vector<int>& idx, RngStream& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_below(std::uint64_t(i) + 1));
    std::swap(idx[i], idx[j]);
  }
}

}  // namespace

std::vector<std::vector<int>> partition_dataset(const Dataset& dataset,
                                                const PartitionSpec& spec) {
  const int m = dataset.size();
  const int n = spec.n_agents;
  if (n < 1) throw ConfigError("partition needs at least one agent");
  if (n > m) throw ConfigError("more agents than samples");
  if (spec.heterogeneity < 0.0 || spec.heterogeneity > 1.0)
    throw ConfigError("heterogeneity must lie in [0, 1]");

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng = derive_stream(spec.seed, "partition");
  shuffle_indices(order, rng);

  const int m_sorted = static_cast<int>(std::llround(spec.heterogeneity * m));
  std::vector<int> sorted_pool(order.begin(), order.begin() + m_sorted);
  std::vector<int> random_pool(order.begin() + m_sorted, order.end());
  std::stable_sort(sorted_pool.begin(), sorted_pool.end(),
                   [&](int a, int b) { return dataset.labels[a] < dataset.labels[b]; });

  // Per-agent totals differ by at most one; the random pool tops each shard
  // up from its label-sorted share to its total share.
  auto share = [n](int total, int agent) { return total / n + (agent < total % n ? 1 : 0); };

  std::vector<std::vector<int>> shards(n);
  int s_it = 0, r_it = 0;
  for (int a = 0; a < n; ++a) {
    const int n_sorted = share(m_sorted, a);
    const int n_total = share(m, a);
    shards[a].reserve(n_total);
    for (int t = 0; t < n_sorted; ++t) shards[a].push_back(sorted_pool[s_it++]);
    for (int t = n_sorted; t < n_total; ++t) shards[a].push_back(random_pool[r_it++]);
  }
  return shards;
}

}  // namespace adsim
