#include "miace/background.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace miace {

namespace {

constexpr double kSingularRatio = 1e-12;
constexpr double kZeroNorm = 1e-12;

void check_dimension(const Eigen::VectorXd& v, const BackgroundStats& stats,
                     const char* what) {
  if (v.size() != stats.dimension()) {
    throw ConfigError(std::string(what) + " has dimension " +
                      std::to_string(v.size()) + ", statistics have " +
                      std::to_string(stats.dimension()));
  }
}

}  // namespace

std::string to_string(WhitenScope scope) {
  return scope == WhitenScope::NegativeOnly ? "negative" : "global";
}

WhitenScope whiten_scope_from_string(const std::string& name) {
  if (name == "negative") return WhitenScope::NegativeOnly;
  if (name == "global") return WhitenScope::Global;
  throw ConfigError("unknown whitening scope '" + name +
                    "' (expected negative|global)");
}

BackgroundStats BackgroundStats::identity(Eigen::Index d) {
  BackgroundStats stats;
  stats.mean = Eigen::VectorXd::Zero(d);
  stats.covariance = Eigen::MatrixXd::Identity(d, d);
  stats.eigenvectors = Eigen::MatrixXd::Identity(d, d);
  stats.eigenvalues = Eigen::VectorXd::Ones(d);
  stats.epsilon = 0.0;
  return stats;
}

BackgroundStats compute_background_stats(
    const std::vector<Instance>& instances, std::optional<double> epsilon) {
  if (instances.size() < 2) {
    throw InsufficientDataError(
        "background statistics need at least 2 instances, got " +
        std::to_string(instances.size()));
  }
  const Eigen::Index d = instances.front().size();
  if (d < 1) throw ConfigError("instances must have dimension >= 1");
  for (const auto& x : instances) {
    if (x.size() != d) throw ConfigError("instances mix dimensions");
  }

  const double n = static_cast<double>(instances.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& x : instances) mean += x;
  mean /= n;

  // Population (1/N) covariance.
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : instances) {
    const Eigen::VectorXd c = x - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= n;

  double eps = 0.0;
  if (epsilon.has_value()) {
    if (*epsilon < 0.0) throw ConfigError("regularization must be >= 0");
    eps = *epsilon;
  } else {
    eps = 1e-6 * cov.trace() / static_cast<double>(d);
  }
  cov.diagonal().array() += eps;

  // Symmetrize before decomposing to suppress asymmetric round-off.
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw SingularCovarianceError("eigendecomposition failed to converge");
  }

  // Eigen returns ascending order; flip to descending.
  BackgroundStats stats;
  stats.mean = std::move(mean);
  stats.covariance = cov;
  stats.eigenvalues = solver.eigenvalues().reverse();
  stats.eigenvectors = solver.eigenvectors().rowwise().reverse();
  stats.epsilon = eps;

  const double max_eig = stats.eigenvalues[0];
  for (Eigen::Index i = 0; i < d; ++i) {
    if (stats.eigenvalues[i] <= kSingularRatio * max_eig) {
      throw SingularCovarianceError(
          "covariance is singular after regularization: eigenvalue " +
          std::to_string(i) + " = " + std::to_string(stats.eigenvalues[i]) +
          " (max " + std::to_string(max_eig) + ")");
    }
  }
  return stats;
}

BackgroundStats compute_background_stats(const BagSet& bags, WhitenScope scope,
                                         std::optional<double> epsilon) {
  const auto instances = scope == WhitenScope::NegativeOnly
                             ? bags.negative_instances()
                             : bags.all_instances();
  return compute_background_stats(instances, epsilon);
}

WhitenedInstance whiten(const Instance& x, const BackgroundStats& stats,
                        bool normalize) {
  check_dimension(x, stats, "instance");
  WhitenedInstance out;
  out.whitened = stats.eigenvalues.array().rsqrt().matrix().asDiagonal() *
                 (stats.eigenvectors.transpose() * (x - stats.mean));
  if (normalize) {
    const double norm = out.whitened.norm();
    if (norm < kZeroNorm) {
      throw ZeroVectorError(
          "instance coincides with the background mean; cannot normalize");
    }
    out.normalized = out.whitened / norm;
  }
  return out;
}

Eigen::VectorXd unwhiten_signature(const Eigen::VectorXd& s_hat,
                                   const BackgroundStats& stats) {
  check_dimension(s_hat, stats, "signature");
  if (std::abs(s_hat.norm() - 1.0) > 1e-9) {
    throw ConfigError("whitened signature must have unit norm");
  }
  const Eigen::VectorXd t =
      stats.eigenvectors *
      (stats.eigenvalues.array().sqrt() * s_hat.array()).matrix();
  return t / t.norm();
}

}  // namespace miace
