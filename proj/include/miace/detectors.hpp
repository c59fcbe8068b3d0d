#pragma once

#include <string>
#include <vector>

#include "miace/background.hpp"
#include "miace/types.hpp"

namespace miace {

// A learned target signature: unit-norm in the original space and in the
// whitened space, tied to the background statistics it was learned under.
struct TargetSignature {
  Eigen::VectorXd signature;  // original space, unit norm
  Eigen::VectorXd whitened;   // s_hat_hat, unit norm
  Mode mode = Mode::Ace;
  BackgroundStats stats;

  Eigen::Index dimension() const { return signature.size(); }
};

// Builds a signature from an original-space vector; normalizes both forms.
TargetSignature make_signature(const Eigen::VectorXd& s,
                               const BackgroundStats& stats, Mode mode);

struct DetectionScores {
  std::vector<double> scores;
  Mode mode = Mode::Ace;
  std::string signature_id;
};

// SMF statistic, computed through the whitened path:
// s^T Sigma^{-1} (x - mu) / sqrt(s^T Sigma^{-1} s). An instance exactly at
// the background mean scores 0.
double smf_score(const Instance& x, const Eigen::VectorXd& s,
                 const BackgroundStats& stats);

// ACE statistic: the cosine between whitened instance and whitened
// signature, in [-1, 1]. An instance at the background mean is an error.
double ace_score(const Instance& x, const Eigen::VectorXd& s,
                 const BackgroundStats& stats);

// Reference forms evaluated with an explicit covariance solve rather than
// the eigendecomposition; kept as the second route for equivalence tests.
double smf_score_direct(const Instance& x, const Eigen::VectorXd& s,
                        const BackgroundStats& stats);
double ace_score_direct(const Instance& x, const Eigen::VectorXd& s,
                        const BackgroundStats& stats);

// Elementwise application of the signature's scorer, order preserving.
// Linear-discriminant signatures score 1-augmented instances. Per-instance
// failures are rethrown with the instance index attached.
DetectionScores score_dataset(const std::vector<Instance>& instances,
                              const TargetSignature& sig);

}  // namespace miace
