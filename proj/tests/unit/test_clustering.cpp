#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "../support/synthetic.hpp"
#include "dibets/clustering.hpp"
#include "dibets/error.hpp"

using namespace dibets;
using testsupport::same_partition;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

// Exhaustive 2-partition search for the minimum SSE.
std::vector<int> brute_force_two_means(const Eigen::MatrixXd& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_labels;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = (mask >> i) & 1;
    double s = 0;
    for (int c = 0; c < 2; ++c) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
      int cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (labels[i] == c) mean += x.row(static_cast<Eigen::Index>(i)), ++cnt;
      mean /= cnt;
      for (std::size_t i = 0; i < n; ++i)
        if (labels[i] == c) s += (x.row(static_cast<Eigen::Index>(i)) - mean).squaredNorm();
    }
    if (s < best) best = s, best_labels = labels;
  }
  return best_labels;
}

double oracle_silhouette(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const auto n = x.rows();
  int k = *std::max_element(labels.begin(), labels.end()) + 1;
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<int> cnt(k, 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[labels[j]] += (x.row(i) - x.row(j)).norm();
      ++cnt[labels[j]];
    }
    int own = labels[i];
    if (cnt[own] == 0) continue;
    double a = sum[own] / cnt[own];
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own && cnt[c] > 0) b = std::min(b, sum[c] / cnt[c]);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST_CASE("PCA on points along y = x") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 2, 2, 3, 3;
  auto r = pca_fit(x, 1);
  CHECK(r.model.components(0, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.model.components(1, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.model.explained_variance_ratio.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.reduced(0, 0) < 0);
  CHECK(r.reduced(3, 0) == doctest::Approx(1.5 * std::sqrt(2.0)));
}

TEST_CASE("PCA agrees with an SVD of the centred data") {
  for (auto [rows, cols] : {std::pair{16, 40}, std::pair{16, 5}, std::pair{7, 7}}) {
    CAPTURE(rows);
    CAPTURE(cols);
    Eigen::MatrixXd x = testsupport::uniform_matrix(rows, cols, 100 + cols);
    std::size_t full = std::min<std::size_t>(rows - 1, cols);
    auto r = pca_fit(x, full);
    CHECK_FALSE(r.model.rank_limited);
    Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinV);
    double total = xc.squaredNorm();
    double cumulative = 0;
    for (std::size_t i = 0; i < full; ++i) {
      double s = svd.singularValues()(static_cast<Eigen::Index>(i));
      CHECK(r.model.explained_variance_ratio[i] == doctest::Approx(s * s / total).epsilon(1e-9));
      double align = std::abs(r.model.components.col(static_cast<Eigen::Index>(i)).dot(svd.matrixV().col(static_cast<Eigen::Index>(i))));
      CHECK(align == doctest::Approx(1.0).epsilon(1e-8));
      cumulative += r.model.explained_variance_ratio[i];
      if (i > 0) CHECK(r.model.explained_variance_ratio[i] <= r.model.explained_variance_ratio[i - 1] + 1e-15);
      CHECK(r.model.explained_variance_ratio[i] >= 0.0);
    }
    CHECK(std::abs(cumulative - 1.0) < 1e-9);
    Eigen::MatrixXd gram = r.model.components.transpose() * r.model.components;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pca_reconstruct_centered(r.model, r.reduced) - xc).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("PCA sign convention is deterministic") {
  Eigen::MatrixXd x = testsupport::uniform_matrix(10, 4, 3);
  auto a = pca_fit(x, 3), b = pca_fit(-x, 3);
  for (Eigen::Index c = 0; c < 3; ++c) {
    for (Eigen::Index i = 0; i < 4; ++i) {
      if (std::abs(a.model.components(i, c)) > 1e-10) {
        CHECK(a.model.components(i, c) > 0);
        break;
      }
    }
  }
  CHECK((a.model.components - b.model.components).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("PCA rank limits and argument errors") {
  Eigen::MatrixXd x(5, 3);
  x << 1, 2, 3, 2, 4, 6, 0, 1, 0, 5, 10, 15, 3, 6, 9;  // rank 2 after centring
  auto r = pca_fit(x, 3);
  CHECK(r.model.rank_limited);
  CHECK(r.model.components.cols() == 2);
  CHECK(r.reduced.cols() == 2);
  CHECK(code_of([&] { pca_fit(x, 0); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { pca_fit(x, 4); }) == Errc::InvalidArgument);
  CHECK(code_of([] { pca_fit(Eigen::MatrixXd::Ones(1, 3), 1); }) == Errc::InvalidArgument);
}

TEST_CASE("k-means matches a brute-force optimum on two small blobs") {
  std::mt19937_64 rng(21);
  Eigen::MatrixXd x(10, 2);
  for (int i = 0; i < 10; ++i) {
    double cx = i < 6 ? 0.0 : 4.0;
    x(i, 0) = testsupport::normal(rng, cx, 0.5);
    x(i, 1) = testsupport::normal(rng, 0.0, 0.5);
  }
  auto r = kmeans(x, {.k = 2, .seed = 42, .restarts = 10});
  CHECK(same_partition(r.assignments, brute_force_two_means(x)));
  CHECK(r.sse == doctest::Approx(sse_of(x, r.assignments)).epsilon(1e-12));
}

TEST_CASE("k-means edge cases") {
  Eigen::MatrixXd x = testsupport::uniform_matrix(6, 2, 9);
  auto all = kmeans(x, {.k = 6});
  CHECK(all.sse == 0.0);
  CHECK_FALSE(all.degenerate);

  Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 2);
  auto d = kmeans(same, {.k = 2});
  CHECK(d.degenerate);
  CHECK(d.sse == 0.0);

  CHECK(code_of([&] { kmeans(x, {.k = 7}); }) == Errc::KTooLarge);
  CHECK(code_of([&] { kmeans(x, {.k = 0}); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { kmeans(x, {.k = 2, .restarts = 0}); }) == Errc::InvalidArgument);
}

TEST_CASE("property: SSE never rises across Lloyd steps and runs are deterministic") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    Eigen::MatrixXd x = testsupport::uniform_matrix(80, 3, seed);
    for (std::size_t k : {2, 4, 7}) {
      KMeansOptions o{.k = k, .seed = seed, .restarts = 3};
      auto r = kmeans(x, o);
      REQUIRE_FALSE(r.sse_trace.empty());
      for (std::size_t i = 1; i < r.sse_trace.size(); ++i) CHECK(r.sse_trace[i] <= r.sse_trace[i - 1] + 1e-9);
      auto again = kmeans(x, o);
      CHECK(again.assignments == r.assignments);
      CHECK(again.sse == r.sse);
      for (int a : r.assignments) CHECK((a >= 0 && a < static_cast<int>(k)));
    }
  }
}

TEST_CASE("three blobs are recovered") {
  auto b = testsupport::three_blobs();
  auto r = kmeans(b.x, {.k = 3, .seed = 42});
  CHECK(same_partition(r.assignments, b.labels));
  CHECK(silhouette(b.x, r.assignments) == doctest::Approx(oracle_silhouette(b.x, r.assignments)).epsilon(1e-12));
}

TEST_CASE("two far blobs score a silhouette above 0.9") {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd x(40, 2);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    labels.push_back(i < 20 ? 0 : 1);
    x(i, 0) = testsupport::normal(rng, i < 20 ? 0.0 : 20.0, 0.5);
    x(i, 1) = testsupport::normal(rng, 0.0, 0.5);
  }
  auto r = kmeans(x, {.k = 2});
  CHECK(same_partition(r.assignments, labels));
  double s = silhouette(x, r.assignments);
  CHECK(s > 0.9);
  CHECK(s == doctest::Approx(oracle_silhouette(x, labels)).epsilon(1e-12));
}

TEST_CASE("property: silhouette matches the oracle and stays in [-1, 1]") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd x = testsupport::uniform_matrix(25, 3, 500 + trial);
    std::vector<int> labels;
    int k = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < 25; ++i) labels.push_back(i < k ? i : static_cast<int>(rng() % k));
    double s = silhouette(x, labels);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    CHECK(s == doctest::Approx(oracle_silhouette(x, labels)).epsilon(1e-12));
  }
  Eigen::MatrixXd x = testsupport::uniform_matrix(4, 2, 1);
  CHECK(code_of([&] { silhouette(x, {0, 0, 0, 0}); }) == Errc::SingleCluster);
  CHECK(code_of([&] { silhouette(x, {0, 1}); }) == Errc::LengthMismatch);
}

TEST_CASE("gap statistic") {
  Eigen::MatrixXd u = testsupport::uniform_matrix(200, 2, 31337);
  for (std::size_t k = 2; k <= 5; ++k) {
    CAPTURE(k);
    CHECK(std::abs(gap_statistic(u, {.k = k, .seed = 42, .restarts = 3}, 10)) < 0.3);
  }
  auto b = testsupport::three_blobs();
  KMeansOptions o{.seed = 42, .restarts = 5};
  auto gap_at = [&](std::size_t k) {
    o.k = k;
    return gap_statistic(b.x, o, 10);
  };
  double g3 = gap_at(3);
  CHECK(g3 > gap_at(2));
  CHECK(g3 > gap_at(4));
  CHECK(code_of([&] { gap_statistic(u, {.k = 2}, 0); }) == Errc::InvalidArgument);
  Eigen::MatrixXd pts = testsupport::uniform_matrix(4, 2, 5);
  CHECK(std::isinf(gap_statistic(pts, {.k = 4}, 2)));
}

TEST_CASE("model_select sweeps, isolates failures and serializes deterministically") {
  auto b = testsupport::three_blobs();
  KMeansOptions o{.seed = 42, .restarts = 5};
  auto sweep = model_select(b.x, {2, 2}, {2, 5}, o, 5);
  REQUIRE(sweep.rows.size() == 4);
  REQUIRE(sweep.best_silhouette);
  CHECK(sweep.rows[*sweep.best_silhouette].k == 3);
  CHECK(sweep_to_csv(sweep) == sweep_to_csv(model_select(b.x, {2, 2}, {2, 5}, o, 5)));
  CHECK(sweep_to_csv(sweep).rfind("n,k,sse,silhouette,gap\n", 0) == 0);

  auto one = model_select(b.x, {1, 1}, {3, 3}, o, 2);
  CHECK(one.rows.size() == 1);

  Eigen::MatrixXd small = testsupport::uniform_matrix(4, 3, 2);
  auto iso = model_select(small, {2, 2}, {2, 6}, o, 2);
  REQUIRE(iso.rows.size() == 5);
  CHECK(iso.rows[0].error.empty());
  CHECK(iso.rows[0].sse);
  CHECK(iso.rows[4].error.find("KTooLarge") != std::string::npos);
  CHECK_FALSE(iso.rows[4].sse);
  CHECK(sweep_to_csv(iso).find("2,6,NA,NA,NA") != std::string::npos);
}
