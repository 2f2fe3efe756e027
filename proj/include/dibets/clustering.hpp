#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dibets {

struct PcaModel {
  Eigen::MatrixXd components;              // one orthonormal component per column
  std::vector<double> explained_variance_ratio;
  Eigen::RowVectorXd mean;
  bool rank_limited = false;               // fewer non-zero eigenvalues than requested
};

struct PcaResult {
  PcaModel model;
  Eigen::MatrixXd reduced;                 // rows x components
};

/// Centres columns, eigendecomposes the covariance (through the Gram matrix
/// when columns outnumber rows) and projects onto the top `n` components.
/// Each component's first non-negligible coordinate is made positive. When
/// fewer than `n` eigenvalues are non-zero the result holds only those and
/// sets rank_limited. Throws InvalidArgument for n == 0, n > min(rows-1,
/// cols) or rows < 2.
PcaResult pca_fit(const Eigen::MatrixXd& x, std::size_t n);

/// Back-projection of reduced coordinates into the centred feature space.
Eigen::MatrixXd pca_reconstruct_centered(const PcaModel& model, const Eigen::MatrixXd& reduced);

struct KMeansOptions {
  std::size_t k = 2;
  std::uint64_t seed = 42;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
};

struct ClusterReport {
  std::size_t k = 0;
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;
  double sse = 0.0;
  std::optional<double> silhouette;
  std::optional<double> gap;
  std::uint64_t seed = 0;
  bool degenerate = false;          // fewer distinct points than k
  std::vector<double> sse_trace;    // per Lloyd assignment step, best restart
};

/// Deterministic per-run generator derived from (seed, stream).
std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream);
// Uniform in [0,1) from the top 53 bits; identical across standard libraries.
double uniform01(std::mt19937_64& rng);

/// k-means++ seeding, Lloyd iterations to a fixpoint or max_iter, best of
/// `restarts` runs by SSE. Empty clusters take the point farthest from its
/// centroid. Throws KTooLarge when k exceeds the row count.
ClusterReport kmeans(const Eigen::MatrixXd& x, const KMeansOptions& options);

double sse_of(const Eigen::MatrixXd& x, const std::vector<int>& assignments);

/// Mean silhouette with Euclidean distance; singleton clusters score 0.
/// Throws SingleCluster when fewer than two clusters are populated.
double silhouette(const Eigen::MatrixXd& x, const std::vector<int>& assignments);

/// mean_b ln SSE_ref_b(k) - ln SSE_X(k), references drawn uniformly over the
/// per-dimension bounding box of x. +inf when SSE_X(k) is 0.
double gap_statistic(const Eigen::MatrixXd& x, const KMeansOptions& options, std::size_t b_refs = 10);

struct SweepRow {
  std::size_t n = 0;
  std::size_t k = 0;
  std::optional<double> sse;
  std::optional<double> silhouette;
  std::optional<double> gap;
  std::string error;  // set when this (n,k) could not be evaluated
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> best_silhouette;  // index into rows
};

/// PCA to each n, then k-means/silhouette/gap for each k. Cells that fail
/// record their error and the sweep continues.
SweepResult model_select(const Eigen::MatrixXd& x, std::pair<std::size_t, std::size_t> n_range,
                         std::pair<std::size_t, std::size_t> k_range, const KMeansOptions& base,
                         std::size_t b_refs = 10);

// n,k,sse,silhouette,gap with "NA" for failed cells.
std::string sweep_to_csv(const SweepResult& sweep);

}  // namespace dibets
