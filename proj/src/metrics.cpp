#include "adsim/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adsim {

ModelVector average_model(const std::vector<ModelVector>& states) {
  if (states.empty()) throw std::invalid_argument("average over zero agents");
  ModelVector mean = states[0];
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (states[i].size() != mean.size())
      throw std::invalid_argument("model dimension mismatch");
    mean.noalias() += states[i];
  }
  mean /= double(states.size());
  return mean;
}

double consensus_error(const std::vector<ModelVector>& states) {
  const ModelVector mean = average_model(states);
  double err = 0.0;
  for (const auto& x : states) err += (x - mean).squaredNorm();
  return err;
}

double running_grad_metric(const std::vector<MetricSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  double total = 0.0;
  for (const auto& s : samples) total += s.grad_norm_sq;
  return total / double(samples.size());
}

double running_grad_metric(const std::vector<std::vector<MetricSample>>& series) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : series) {
    for (const auto& sample : s) total += sample.grad_norm_sq;
    count += s.size();
  }
  if (count == 0) throw std::invalid_argument("no samples");
  return total / double(count);
}

std::optional<double> time_to_target(const std::vector<MetricSample>& series,
                                     double target_loss) {
  for (const auto& s : series)
    if (s.loss_mean <= target_loss) return s.sim_time;
  return std::nullopt;
}

std::map<int, double> speedup(const std::map<int, std::optional<double>>& times) {
  if (times.empty()) throw std::invalid_argument("empty speedup table");
  const auto& baseline = times.begin()->second;
  if (!baseline.has_value())
    throw std::invalid_argument("baseline entry did not reach the target");
  std::map<int, double> out;
  for (const auto& [n, t] : times)
    if (t.has_value()) out[n] = baseline.value() / t.value();
  return out;
}

MetricsRecorder::MetricsRecorder(const std::vector<LocalProblem>& problems, int n_agents,
                                 std::uint64_t stride)
    : problems_(problems), n_(n_agents), stride_(stride == 0 ? 1 : stride) {}

void MetricsRecorder::operator()(double time, std::uint64_t total_commits,
                                 const ModelAccessor& model_of) {
  if (total_commits % stride_ != 0) return;
  last_k_ = total_commits;
  sample(time, total_commits, model_of);
}

void MetricsRecorder::finalize(double time, const ModelAccessor& model_of) {
  if (!samples_.empty() && samples_.back().k == last_k_ && last_k_ != 0) return;
  sample(time, last_k_, model_of);
}

void MetricsRecorder::sample(double time, std::uint64_t k, const ModelAccessor& model_of) {
  std::vector<ModelVector> states;
  states.reserve(n_);
  for (int i = 0; i < n_; ++i) states.push_back(model_of(i));
  const ModelVector mean = average_model(states);

  MetricSample s;
  s.sim_time = time;
  s.k = k;
  s.loss_mean = global_loss(problems_, mean);
  s.consensus_error = consensus_error(states);
  s.grad_norm_sq = global_gradient(problems_, mean).squaredNorm();
  samples_.push_back(s);
}

void write_metrics_csv(const std::vector<MetricSample>& samples, std::uint64_t seed,
                       const std::string& algorithm, const std::string& case_name,
                       const std::string& config_hash, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write metrics file: " + path);
  std::fprintf(f, "# config_hash=%s\n", config_hash.c_str());
  std::fprintf(f, "sim_time,k,loss_mean,consensus_err,grad_norm_sq,seed,algorithm,case\n");
  for (const auto& s : samples) {
    std::fprintf(f, "%.17g,%" PRIu64 ",%.17g,%.17g,%.17g,%" PRIu64 ",%s,%s\n", s.sim_time, s.k,
                 s.loss_mean, s.consensus_error, s.grad_norm_sq, seed, algorithm.c_str(),
                 case_name.c_str());
  }
  std::fclose(f);
}

std::vector<MetricSample> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  std::vector<MetricSample> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    MetricSample s;
    std::getline(ss, cell, ',');
    s.sim_time = std::stod(cell);
    std::getline(ss, cell, ',');
    s.k = std::stoull(cell);
    std::getline(ss, cell, ',');
    s.loss_mean = std::stod(cell);
    std::getline(ss, cell, ',');
    s.consensus_error = std::stod(cell);
    std::getline(ss, cell, ',');
    s.grad_norm_sq = std::stod(cell);
    out.push_back(s);
  }
  return out;
}

}  // namespace adsim
