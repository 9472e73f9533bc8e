#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adsim/engine.hpp"
#include "adsim/problems.hpp"

namespace adsim {

// One evaluation of the reported quantities at a committed-update count k:
// global loss at the average model, dispersion around the mean, and the
// squared norm of the global gradient at the mean.
struct MetricSample {
  double sim_time = 0.0;
  std::uint64_t k = 0;
  double loss_mean = 0.0;
  double consensus_error = 0.0;
  double grad_norm_sq = 0.0;
};

ModelVector average_model(const std::vector<ModelVector>& states);
double consensus_error(const std::vector<ModelVector>& states);

// Mean of |grad f(x_bar)|^2 over the samples.
double running_grad_metric(const std::vector<MetricSample>& samples);
// Combined over seed replications: mean over all samples of all series.
double running_grad_metric(const std::vector<std::vector<MetricSample>>& series);

// First sample whose loss is at or below the target; nullopt if never.
std::optional<double> time_to_target(const std::vector<MetricSample>& series,
                                     double target_loss);

// speedup(n) = time(baseline) / time(n), baseline = smallest agent count.
// Entries whose time is missing stay absent from the result.
std::map<int, double> speedup(const std::map<int, std::optional<double>>& times);

// Samples every `stride` committed updates through the engine commit hook.
// Evaluation is read-only on the models; the global objective is always
// sum_i f_i, never reweighted by update frequency.
class MetricsRecorder {
 public:
  MetricsRecorder(const std::vector<LocalProblem>& problems, int n_agents,
                  std::uint64_t stride);

  void operator()(double time, std::uint64_t total_commits, const ModelAccessor& model_of);
  void finalize(double time, const ModelAccessor& model_of);  // sample at termination

  const std::vector<MetricSample>& samples() const { return samples_; }

 private:
  void sample(double time, std::uint64_t k, const ModelAccessor& model_of);

  const std::vector<LocalProblem>& problems_;
  int n_;
  std::uint64_t stride_;
  std::uint64_t last_k_ = 0;
  std::vector<MetricSample> samples_;
};

// CSV schema: "sim_time,k,loss_mean,consensus_err,grad_norm_sq,seed,algorithm,case".
void write_metrics_csv(const std::vector<MetricSample>& samples, std::uint64_t seed,
                       const std::string& algorithm, const std::string& case_name,
                       const std::string& config_hash, const std::string& path);
std::vector<MetricSample> read_metrics_csv(const std::string& path);

}  // namespace adsim
