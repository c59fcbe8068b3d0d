#pragma once

#include <optional>
#include <vector>

#include "miace/types.hpp"

namespace miace {

// Which instances the background statistics are fit on. Negative-only is
// the default; Global exists for low-dimensional data where negative-only
// whitening distorts the geometry.
enum class WhitenScope { NegativeOnly, Global };

std::string to_string(WhitenScope scope);
WhitenScope whiten_scope_from_string(const std::string& name);

// Background mean, regularized population covariance, and its symmetric
// eigendecomposition (eigenvalues descending). The whitening transform is
// D^{-1/2} U^T applied to mean-subtracted instances.
struct BackgroundStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;    // population covariance + epsilon * I
  Eigen::MatrixXd eigenvectors;  // U, columns in eigenvalue order
  Eigen::VectorXd eigenvalues;   // D, all > 0, sorted descending
  double epsilon = 0.0;          // ridge actually added

  Eigen::Index dimension() const { return mean.size(); }

  // Identity statistics of dimension d (zero mean, unit covariance).
  static BackgroundStats identity(Eigen::Index d);
};

struct WhitenedInstance {
  Eigen::VectorXd whitened;                  // D^{-1/2} U^T (x - mu)
  std::optional<Eigen::VectorXd> normalized; // unit-norm form, ACE only
};

// Mean and population (1/N) covariance of the given instances, plus
// epsilon * I ridge. Passing nullopt for epsilon applies the default
// 1e-6 * trace(Sigma) / d. Throws InsufficientDataError for fewer than
// two instances and SingularCovarianceError when any eigenvalue of the
// regularized covariance is <= 1e-12 times the largest.
BackgroundStats compute_background_stats(
    const std::vector<Instance>& instances,
    std::optional<double> epsilon = std::nullopt);

// Gathers instances from the bags per `scope` and fits on those.
BackgroundStats compute_background_stats(
    const BagSet& bags, WhitenScope scope,
    std::optional<double> epsilon = std::nullopt);

// x_hat = D^{-1/2} U^T (x - mu). With normalize set, also returns the
// unit-norm form; an instance at the background mean (|x_hat| < 1e-12)
// cannot be normalized and raises ZeroVectorError.
WhitenedInstance whiten(const Instance& x, const BackgroundStats& stats,
                        bool normalize);

// Back-transform of a whitened unit signature: s = t / |t| with
// t = U D^{1/2} s_hat. Round-tripping s through whiten+normalize
// recovers s_hat.
Eigen::VectorXd unwhiten_signature(const Eigen::VectorXd& s_hat,
                                   const BackgroundStats& stats);

}  // namespace miace
