#include <doctest.h>

#include <Eigen/Dense>
#include <map>

#include "adsim/dataset.hpp"
#include "adsim/problems.hpp"
#include "oracles.hpp"

using namespace adsim;

TEST_CASE("quadratic: 1-d sanity and first-order optimality") {
  auto fam = make_quadratic(1, 1, 3, 1.0);
  // A = [1] up to sign; gradient of 0.5 (a x - b)^2 at x* + 1/a has magnitude 1.
  ModelVector x(1);
  x(0) = fam.minimizer[0](0) + 1.0 / fam.a[0](0, 0);
  CHECK(std::abs(fam.problems[0].full_gradient(x)(0)) == doctest::Approx(1.0));

  auto fam2 = make_quadratic(3, 4, 17, 25.0);
  for (int i = 0; i < 3; ++i) {
    const ModelVector g = fam2.problems[i].full_gradient(fam2.minimizer[i]);
    CHECK(g.norm() <= 1e-10);
    CHECK(fam2.problems[i].loss(fam2.minimizer[i]) <= 1e-20);
  }
  CHECK_THROWS(make_quadratic(2, 0, 1, 2.0));
  CHECK_THROWS(make_quadratic(2, 3, 1, 0.5));
}

TEST_CASE("quadratic: global minimizer matches dense normal-equations solve") {
  auto fam = make_quadratic(2, 2, 11, 8.0);
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < 2; ++i) {
    lhs += fam.a[i].transpose() * fam.a[i];
    rhs += fam.a[i].transpose() * fam.b[i];
  }
  const Eigen::VectorXd xstar = lhs.fullPivLu().solve(rhs);
  const ModelVector g = global_gradient(fam.problems, xstar);
  CHECK(g.norm() <= 1e-9);
}

TEST_CASE("quadratic smoothness equals the spectrum top") {
  auto fam = make_quadratic(2, 5, 5, 12.0);
  for (int i = 0; i < 2; ++i) {
    const auto ev = oracles::jacobi_eigenvalues(fam.a[i].transpose() * fam.a[i]);
    CHECK(ev.back() == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(ev.front() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fam.problems[i].smoothness == doctest::Approx(12.0));
  }
}

TEST_CASE("partition: zeta=0 keeps shard histograms near the global one") {
  Dataset data = make_blobs(3000, 4, 42);
  PartitionSpec spec{6, 0.0, 9};
  auto shards = partition_dataset(data, spec);
  // Global label split is 50/50; a shard of 500 has sd ~ sqrt(500*0.25) ~ 11.
  for (const auto& shard : shards) {
    int ones = 0;
    for (int s : shard) ones += data.labels[s];
    const double expected = 0.5 * double(shard.size());
    const double sd = std::sqrt(double(shard.size()) * 0.25);
    CHECK(std::abs(ones - expected) <= 3.0 * sd);
  }
}

TEST_CASE("partition: zeta=1 with two labels and two agents separates labels") {
  Dataset data = make_blobs(400, 3, 5);
  PartitionSpec spec{2, 1.0, 123};
  auto shards = partition_dataset(data, spec);
  for (int a = 0; a < 2; ++a) {
    std::map<int, int> hist;
    for (int s : shards[a]) hist[data.labels[s]] += 1;
    CHECK(hist.size() == 1);  // one label per agent
  }
}

TEST_CASE("partition: exhaustive, disjoint, balanced, deterministic") {
  Dataset data = make_blobs(1001, 2, 8);
  for (double zeta : {0.0, 0.3, 0.7, 1.0}) {
    PartitionSpec spec{7, zeta, 77};
    auto shards = partition_dataset(data, spec);
    std::vector<int> seen(1001, 0);
    std::size_t lo = 1001, hi = 0;
    for (const auto& shard : shards) {
      lo = std::min(lo, shard.size());
      hi = std::max(hi, shard.size());
      for (int s : shard) seen[s] += 1;
    }
    for (int c : seen) CHECK(c == 1);
    CHECK(hi - lo <= 1);
    CHECK(partition_dataset(data, spec) == shards);
  }
  CHECK_THROWS(partition_dataset(data, PartitionSpec{2000, 0.0, 1}));
}

TEST_CASE("logreg: loss at zero, regularizer gradient, full-gradient oracle") {
  Dataset data = make_blobs(40, 3, 21);
  PartitionSpec spec{2, 0.0, 2};
  auto shards = partition_dataset(data, spec);
  LogRegParams params{0.07, 8};
  auto problems = make_nonconvex_logreg(data, shards, params);

  const ModelVector zero = ModelVector::Zero(3);
  CHECK(problems[0].loss(zero) == doctest::Approx(std::log(2.0)));

  // Regularizer gradient against its closed form and finite differences.
  RngStream rng(3);
  for (int t = 0; t < 20; ++t) {
    ModelVector x(3);
    for (int j = 0; j < 3; ++j) x(j) = 2.0 * rng.normal();
    const ModelVector g = problems[0].full_gradient(x);
    const ModelVector fd = oracles::fd_gradient(problems[0].loss, x);
    CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }

  // Mean of per-sample gradients on a small shard, by a naive loop.
  std::vector<std::vector<int>> tiny = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {10, 11}};
  auto small = make_nonconvex_logreg(data, tiny, LogRegParams{0.0, 4});
  ModelVector x(3);
  x << 0.3, -0.2, 0.5;
  ModelVector naive = ModelVector::Zero(3);
  for (int s : tiny[0]) {
    const double z = data.features.row(s).dot(x);
    const double p = 1.0 / (1.0 + std::exp(-z));
    naive += (p - data.labels[s]) * data.features.row(s).transpose();
  }
  naive /= 10.0;
  CHECK((small[0].full_gradient(x) - naive).norm() <= 1e-12);

  CHECK_THROWS(make_nonconvex_logreg(data, {{0, 1}, {}}, params));
}

TEST_CASE("stochastic gradients are unbiased with bounded variance") {
  Dataset data = make_blobs(300, 3, 33);
  auto shards = partition_dataset(data, PartitionSpec{3, 0.5, 4});
  auto logregs = make_nonconvex_logreg(data, shards, LogRegParams{0.02, 8});
  auto quads = make_quadratic(2, 3, 5, 6.0, 0.5);

  std::vector<const LocalProblem*> all;
  for (const auto& p : logregs) all.push_back(&p);
  for (const auto& p : quads.problems) all.push_back(&p);

  RngStream point_rng(11);
  for (const LocalProblem* p : all) {
    for (int rep = 0; rep < 5; ++rep) {
      ModelVector x(p->dim);
      for (int j = 0; j < p->dim; ++j) x(j) = point_rng.normal();
      const ModelVector mean = p->full_gradient(x);
      RngStream rng(100 + rep);
      ModelVector acc = ModelVector::Zero(p->dim);
      double second = 0.0;
      const int draws = 10000;
      for (int t = 0; t < draws; ++t) {
        const ModelVector g = p->stochastic_gradient(x, rng);
        acc += g;
        second += (g - mean).squaredNorm();
      }
      acc /= double(draws);
      const double sigma = std::sqrt(p->variance_bound);
      for (int j = 0; j < p->dim; ++j)
        CHECK(std::abs(acc(j) - mean(j)) <= std::max(4.0 * sigma / 100.0, 1e-12));
      CHECK(second / draws <= p->variance_bound * 1.05 + 1e-12);
      CHECK(p->loss(x) >= p->lower_bound - 1e-12);
    }
  }
}

TEST_CASE("gradient correctness by central differences on both problems") {
  auto fam = make_quadratic(2, 4, 9, 4.0);
  Dataset data = make_blobs(60, 4, 2);
  auto logregs =
      make_nonconvex_logreg(data, partition_dataset(data, PartitionSpec{2, 0.0, 3}),
                            LogRegParams{0.1, 4});
  RngStream rng(8);
  for (const auto* p : {&fam.problems[0], &fam.problems[1], &logregs[0], &logregs[1]}) {
    for (int t = 0; t < 20; ++t) {
      ModelVector x(p->dim);
      for (int j = 0; j < p->dim; ++j) x(j) = rng.normal();
      const ModelVector fd = oracles::fd_gradient(p->loss, x);
      const ModelVector g = p->full_gradient(x);
      CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("determinism: same seed, same shards, same gradient stream") {
  Dataset a = make_blobs(200, 3, 77);
  Dataset b = make_blobs(200, 3, 77);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);

  auto shards1 = partition_dataset(a, PartitionSpec{4, 0.5, 5});
  auto shards2 = partition_dataset(b, PartitionSpec{4, 0.5, 5});
  CHECK(shards1 == shards2);

  auto p1 = make_nonconvex_logreg(a, shards1, LogRegParams{0.0, 4});
  auto p2 = make_nonconvex_logreg(b, shards2, LogRegParams{0.0, 4});
  ModelVector x = ModelVector::Constant(3, 0.2);
  RngStream r1(9), r2(9);
  for (int t = 0; t < 50; ++t)
    CHECK((p1[0].stochastic_gradient(x, r1) - p2[0].stochastic_gradient(x, r2)).norm() == 0.0);
}

TEST_CASE("smoothness estimate: exact on scaled identity, monotone, bounded for logreg") {
  // A = 2I: the gradient map is exactly 4-Lipschitz.
  QuadraticFamily fam;
  {
    auto base = make_quadratic(1, 3, 1, 4.0);
    base.a[0] = 2.0 * Eigen::MatrixXd::Identity(3, 3);
    base.b[0] = Eigen::VectorXd::Zero(3);
    auto a_ptr = std::make_shared<Eigen::MatrixXd>(base.a[0]);
    auto b_ptr = std::make_shared<Eigen::VectorXd>(base.b[0]);
    base.problems[0].full_gradient = [a_ptr, b_ptr](const ModelVector& x) -> ModelVector {
      return a_ptr->transpose() * (*a_ptr * x - *b_ptr);
    };
    base.problems[0].loss = [a_ptr, b_ptr](const ModelVector& x) {
      return 0.5 * (*a_ptr * x - *b_ptr).squaredNorm();
    };
    fam = std::move(base);
  }
  RngStream rng(5);
  const double est = estimate_smoothness(fam.problems[0], 100, rng);
  CHECK(est == doctest::Approx(4.0).epsilon(0.01));

  // Nested sampling: the max over a prefix of the same stream is monotone.
  RngStream r1(6), r2(6);
  const double e50 = estimate_smoothness(fam.problems[0], 50, r1);
  RngStream r3(6);
  const double e120 = estimate_smoothness(fam.problems[0], 120, r3);
  CHECK(e120 >= e50);
  (void)r2;

  // Logistic analytic bound 0.25 lambda_max(X^T X)/m + 2 reg on one shard.
  Dataset data = make_blobs(10, 3, 13);
  std::vector<std::vector<int>> shard = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  const double reg = 0.05;
  auto problems = make_nonconvex_logreg(data, shard, LogRegParams{reg, 2});
  Eigen::MatrixXd gram = data.features.transpose() * data.features / 10.0;
  const double bound = 0.25 * oracles::jacobi_eigenvalues(gram).back() + 2.0 * reg;
  RngStream r4(14);
  CHECK(estimate_smoothness(problems[0], 300, r4) <= bound + 1e-9);
  CHECK(problems[0].smoothness == doctest::Approx(bound).epsilon(1e-9));

  CHECK_THROWS(estimate_smoothness(fam.problems[0], 0, rng));
}

TEST_CASE("IDX and CSV ingestion round out the data paths") {
  // Write a tiny IDX pair: 3 images of 2x2, labels 7, 4, 1.
  const char* img_path = "/tmp/adsim_test_images.idx";
  const char* lab_path = "/tmp/adsim_test_labels.idx";
  {
    std::FILE* f = std::fopen(img_path, "wb");
    auto be32 = [&](std::uint32_t v) {
      unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
      std::fwrite(b, 1, 4, f);
    };
    be32(0x00000803u);
    be32(3);
    be32(2);
    be32(2);
    for (int s = 0; s < 3; ++s)
      for (int p = 0; p < 4; ++p) {
        unsigned char v = static_cast<unsigned char>(50 * s + 10 * p);
        std::fwrite(&v, 1, 1, f);
      }
    std::fclose(f);
    f = std::fopen(lab_path, "wb");
    auto be32l = [&](std::uint32_t v) {
      unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
      std::fwrite(b, 1, 4, f);
    };
    be32l(0x00000801u);
    be32l(3);
    unsigned char labels[3] = {7, 4, 1};
    std::fwrite(labels, 1, 3, f);
    std::fclose(f);
  }
  Dataset idx = load_idx(img_path, lab_path);
  CHECK(idx.size() == 3);
  CHECK(idx.dim() == 4);
  CHECK(idx.labels == std::vector<int>{1, 0, 1});  // parity of 7, 4, 1
  CHECK(idx.features(1, 2) == doctest::Approx((50 + 20) / 255.0));

  const char* csv_path = "/tmp/adsim_test_data.csv";
  {
    std::FILE* f = std::fopen(csv_path, "wb");
    std::fprintf(f, "f0,f1,label\n1.5,-2.0,0\n0.25,3.5,1\n");
    std::fclose(f);
  }
  Dataset csv = load_csv(csv_path);
  CHECK(csv.size() == 2);
  CHECK(csv.dim() == 2);
  CHECK(csv.features(0, 1) == doctest::Approx(-2.0));
  CHECK(csv.labels == std::vector<int>{0, 1});
}
