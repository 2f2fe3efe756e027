#include "dibets/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dibets/error.hpp"
#include "dibets/io.hpp"

namespace dibets {

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

PcaResult pca_fit(const Eigen::MatrixXd& x, std::size_t n) {
  const auto rows = static_cast<std::size_t>(x.rows());
  const auto cols = static_cast<std::size_t>(x.cols());
  if (rows < 2) throw Error(Errc::InvalidArgument, "PCA needs at least 2 rows");
  if (n == 0) throw Error(Errc::InvalidArgument, "PCA needs n >= 1");
  if (n > std::min(rows - 1, cols)) {
    throw Error(Errc::InvalidArgument, "n=" + std::to_string(n) + " exceeds min(rows-1, cols)=" +
                                           std::to_string(std::min(rows - 1, cols)));
  }
  PcaResult out;
  out.model.mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - out.model.mean;
  const double denom = static_cast<double>(rows - 1);
  const double total_variance = centered.squaredNorm() / denom;

  const bool gram = cols > rows;
  Eigen::MatrixXd scatter = gram ? Eigen::MatrixXd(centered * centered.transpose() / denom)
                                 : Eigen::MatrixXd(centered.transpose() * centered / denom);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
  if (solver.info() != Eigen::Success) throw Error(Errc::InvalidArgument, "eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const Eigen::Index m = values.size();

  const double largest = m > 0 ? std::max(values(m - 1), 0.0) : 0.0;
  const double tol = std::max(largest, 1e-300) * 1e-10;
  std::size_t nonzero = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (values(i) > tol) ++nonzero;
  }
  std::size_t keep = std::min(n, nonzero);
  out.model.rank_limited = keep < n;
  out.model.components.resize(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(keep));
  for (std::size_t c = 0; c < keep; ++c) {
    const Eigen::Index idx = m - 1 - static_cast<Eigen::Index>(c);
    Eigen::VectorXd v = gram ? Eigen::VectorXd(centered.transpose() * vectors.col(idx)) : Eigen::VectorXd(vectors.col(idx));
    v.normalize();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::fabs(v(i)) > 1e-10) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    out.model.components.col(static_cast<Eigen::Index>(c)) = v;
    out.model.explained_variance_ratio.push_back(total_variance > 0 ? std::max(values(idx), 0.0) / total_variance : 0.0);
  }
  out.reduced = centered * out.model.components;
  return out;
}

Eigen::MatrixXd pca_reconstruct_centered(const PcaModel& model, const Eigen::MatrixXd& reduced) {
  return reduced * model.components.transpose();
}

double sse_of(const Eigen::MatrixXd& x, const std::vector<int>& assignments) {
  int k = assignments.empty() ? 0 : *std::max_element(assignments.begin(), assignments.end()) + 1;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
  std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sums.row(assignments[static_cast<std::size_t>(i)]) += x.row(i);
    sizes[static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)])] += 1.0;
  }
  double sse = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int c = assignments[static_cast<std::size_t>(i)];
    sse += (x.row(i) - sums.row(c) / sizes[static_cast<std::size_t>(c)]).squaredNorm();
  }
  return sse;
}

namespace {

struct Run {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;
  double sse = 0.0;
  std::vector<double> trace;
};

Eigen::MatrixXd plus_plus_init(const Eigen::MatrixXd& x, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), x.cols());
  std::vector<bool> chosen(n, false);
  auto pick_uniform_unchosen = [&] {
    std::size_t remaining = static_cast<std::size_t>(std::count(chosen.begin(), chosen.end(), false));
    auto target = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(remaining));
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      if (target-- == 0) return i;
    }
    return n - 1;
  };
  std::size_t first = pick_uniform_unchosen();
  chosen[first] = true;
  centers.row(0) = x.row(static_cast<Eigen::Index>(first));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (x.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    }
    if (pick == n) pick = pick_uniform_unchosen();
    chosen[pick] = true;
    centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centers;
}

Run lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centers, std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(centers.rows());
  Run run;
  run.assignments.assign(n, -1);
  std::vector<int> next(n);
  std::vector<double> dist(n);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double d = (x.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best) {
          best = d;
          arg = static_cast<int>(c);
        }
      }
      next[i] = arg;
      dist[i] = best;
      sse += best;
    }
    run.trace.push_back(sse);
    if (next == run.assignments) break;
    run.assignments = next;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), x.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(run.assignments[i]) += x.row(static_cast<Eigen::Index>(i));
      ++sizes[static_cast<std::size_t>(run.assignments[i])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(sizes[c]);
        continue;
      }
      // Empty cluster: reseed at the point farthest from its centroid whose cluster can spare it.
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(run.assignments[i])] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      if (far == n) continue;
      --sizes[static_cast<std::size_t>(run.assignments[far])];
      run.assignments[far] = static_cast<int>(c);
      sizes[c] = 1;
      dist[far] = 0.0;
      centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(far));
    }
  }
  // Final centroids are the means of the final partition.
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), x.cols());
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sums.row(run.assignments[i]) += x.row(static_cast<Eigen::Index>(i));
    ++sizes[static_cast<std::size_t>(run.assignments[i])];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0) centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(sizes[c]);
  }
  run.centroids = centers;
  run.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    run.sse += (x.row(static_cast<Eigen::Index>(i)) - centers.row(run.assignments[i])).squaredNorm();
  }
  return run;
}

}  // namespace

ClusterReport kmeans(const Eigen::MatrixXd& x, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (options.k == 0) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (options.k > n) {
    throw Error(Errc::KTooLarge, "k=" + std::to_string(options.k) + " exceeds " + std::to_string(n) + " rows");
  }
  if (options.restarts < 1) throw Error(Errc::InvalidArgument, "restarts must be >= 1");
  if (options.max_iter < 1) throw Error(Errc::InvalidArgument, "max_iter must be >= 1");

  std::optional<Run> best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    auto rng = seeded_rng(options.seed, r);
    Run run = lloyd(x, plus_plus_init(x, options.k, rng), options.max_iter);
    if (!best || run.sse < best->sse) best = std::move(run);
  }
  ClusterReport report;
  report.k = options.k;
  report.seed = options.seed;
  report.assignments = std::move(best->assignments);
  report.centroids = std::move(best->centroids);
  report.sse = best->sse;
  report.sse_trace = std::move(best->trace);

  std::set<std::vector<double>> distinct;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    distinct.insert(std::move(row));
  }
  report.degenerate = distinct.size() < options.k;
  return report;
}

double silhouette(const Eigen::MatrixXd& x, const std::vector<int>& assignments) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (assignments.size() != n) throw Error(Errc::LengthMismatch, "assignments vs rows");
  int k = n == 0 ? 0 : *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2) {
    throw Error(Errc::SingleCluster, "silhouette needs at least two populated clusters");
  }
  double total = 0.0;
  std::vector<double> sum_to(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = static_cast<std::size_t>(assignments[i]);
    if (sizes[ci] == 1) continue;  // singleton scores 0
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum_to[static_cast<std::size_t>(assignments[j])] +=
          (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sum_to[ci] / static_cast<double>(sizes[ci] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum_to.size(); ++c) {
      if (c == ci || sizes[c] == 0) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

double gap_statistic(const Eigen::MatrixXd& x, const KMeansOptions& options, std::size_t b_refs) {
  if (b_refs < 1) throw Error(Errc::InvalidArgument, "gap statistic needs b_refs >= 1");
  const double sse_x = kmeans(x, options).sse;
  const Eigen::RowVectorXd lo = x.colwise().minCoeff();
  const Eigen::RowVectorXd hi = x.colwise().maxCoeff();
  double mean_log_ref = 0.0;
  for (std::size_t b = 0; b < b_refs; ++b) {
    auto rng = seeded_rng(options.seed, 0x9E3779B97F4A7C15ull + b);
    Eigen::MatrixXd ref(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < ref.rows(); ++i) {
      for (Eigen::Index j = 0; j < ref.cols(); ++j) ref(i, j) = lo(j) + uniform01(rng) * (hi(j) - lo(j));
    }
    mean_log_ref += std::log(kmeans(ref, options).sse);
  }
  mean_log_ref /= static_cast<double>(b_refs);
  if (sse_x <= 0.0) return std::numeric_limits<double>::infinity();
  return mean_log_ref - std::log(sse_x);
}

SweepResult model_select(const Eigen::MatrixXd& x, std::pair<std::size_t, std::size_t> n_range,
                         std::pair<std::size_t, std::size_t> k_range, const KMeansOptions& base, std::size_t b_refs) {
  SweepResult out;
  for (std::size_t n = n_range.first; n <= n_range.second; ++n) {
    std::optional<PcaResult> pca;
    std::string pca_error;
    try {
      pca = pca_fit(x, n);
    } catch (const Error& e) {
      pca_error = e.what();
    }
    for (std::size_t k = k_range.first; k <= k_range.second; ++k) {
      SweepRow row;
      row.n = n;
      row.k = k;
      if (!pca) {
        row.error = pca_error;
        out.rows.push_back(std::move(row));
        continue;
      }
      KMeansOptions opts = base;
      opts.k = k;
      try {
        ClusterReport rep = kmeans(pca->reduced, opts);
        row.sse = rep.sse;
        try {
          row.silhouette = silhouette(pca->reduced, rep.assignments);
        } catch (const Error& e) {
          if (e.code() != Errc::SingleCluster) throw;
        }
        row.gap = gap_statistic(pca->reduced, opts, b_refs);
      } catch (const Error& e) {
        row.error = e.what();
      }
      out.rows.push_back(std::move(row));
    }
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& s = out.rows[i].silhouette;
    if (s && (!out.best_silhouette || *s > *out.rows[*out.best_silhouette].silhouette)) out.best_silhouette = i;
  }
  return out;
}

std::string sweep_to_csv(const SweepResult& sweep) {
  auto cell = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string("NA"); };
  std::string out = "n,k,sse,silhouette,gap\n";
  for (const auto& r : sweep.rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.k) + "," + cell(r.sse) + "," + cell(r.silhouette) + "," +
           cell(r.gap) + "\n";
  }
  return out;
}

}  // namespace dibets
