// Test-only reference implementations, kept independent of the library code
// paths they are used to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Central finite differences with step h.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd hi = x, lo = x;
    hi(j) += h;
    lo(j) -= h;
    g(j) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// Cyclic Jacobi eigenvalue iteration for symmetric matrices; ascending.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, int sweeps = 64) {
  const int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n);
        j(p, p) = c;
        j(q, q) = c;
        j(p, q) = s;
        j(q, p) = -s;
        a = j.transpose() * a * j;
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Dense synchronous gossip-descent recursion x <- (W (x) I) x - alpha grad F(x),
// stacking agents' models row-blockwise.
inline std::vector<Eigen::VectorXd> dense_sync_recursion(
    const Eigen::MatrixXd& w, std::vector<Eigen::VectorXd> x, double alpha,
    const std::function<Eigen::VectorXd(int, const Eigen::VectorXd&)>& grad, int steps) {
  const int n = static_cast<int>(x.size());
  for (int step = 0; step < steps; ++step) {
    std::vector<Eigen::VectorXd> next(n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd mix = Eigen::VectorXd::Zero(x[0].size());
      for (int j = 0; j < n; ++j) mix += w(i, j) * x[j];
      next[i] = mix - alpha * grad(i, x[i]);
    }
    x = std::move(next);
  }
  return x;
}

// Mean of a lognormal(mu, s) truncated to [lo, hi], by Simpson quadrature of
// the density over the support.
inline double truncated_lognormal_mean(double mean, double cv, double lo, double hi) {
  const double s2 = std::log1p(cv * cv);
  const double mu = std::log(mean) - 0.5 * s2;
  const double s = std::sqrt(s2);
  auto pdf = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double z = (std::log(v) - mu) / s;
    return std::exp(-0.5 * z * z) / (v * s * std::sqrt(2.0 * M_PI));
  };
  const int steps = 200000;
  const double h = (hi - lo) / steps;
  double mass = 0.0, first_moment = 0.0;
  for (int t = 0; t <= steps; ++t) {
    const double v = lo + t * h;
    const double weight = (t == 0 || t == steps) ? 1.0 : (t % 2 == 1 ? 4.0 : 2.0);
    mass += weight * pdf(v);
    first_moment += weight * v * pdf(v);
  }
  return first_moment / mass;
}

}  // namespace oracles
