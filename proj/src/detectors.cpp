#include "miace/detectors.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace miace {

namespace {

constexpr double kZeroNorm = 1e-12;

Eigen::VectorXd whitened_unit_signature(const Eigen::VectorXd& s,
                                        const BackgroundStats& stats) {
  if (s.size() != stats.dimension()) {
    throw ConfigError("signature dimension does not match statistics");
  }
  if (s.norm() < kZeroNorm) {
    throw ZeroSignatureError("signature is the zero vector");
  }
  const Eigen::VectorXd s_hat =
      stats.eigenvalues.array().rsqrt().matrix().asDiagonal() *
      (stats.eigenvectors.transpose() * s);
  return s_hat / s_hat.norm();
}

}  // namespace

TargetSignature make_signature(const Eigen::VectorXd& s,
                               const BackgroundStats& stats, Mode mode) {
  if (s.norm() < kZeroNorm) {
    throw ZeroSignatureError("signature is the zero vector");
  }
  TargetSignature sig;
  sig.signature = s / s.norm();
  sig.whitened = whitened_unit_signature(s, stats);
  sig.mode = mode;
  sig.stats = stats;
  return sig;
}

double smf_score(const Instance& x, const Eigen::VectorXd& s,
                 const BackgroundStats& stats) {
  const Eigen::VectorXd s_unit = whitened_unit_signature(s, stats);
  return s_unit.dot(whiten(x, stats, false).whitened);
}

double ace_score(const Instance& x, const Eigen::VectorXd& s,
                 const BackgroundStats& stats) {
  const Eigen::VectorXd s_unit = whitened_unit_signature(s, stats);
  const auto w = whiten(x, stats, true);
  return s_unit.dot(*w.normalized);
}

double smf_score_direct(const Instance& x, const Eigen::VectorXd& s,
                        const BackgroundStats& stats) {
  if (s.norm() < kZeroNorm) {
    throw ZeroSignatureError("signature is the zero vector");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance);
  const Eigen::VectorXd sol_s = llt.solve(s);
  const Eigen::VectorXd centered = x - stats.mean;
  return s.dot(llt.solve(centered)) / std::sqrt(s.dot(sol_s));
}

double ace_score_direct(const Instance& x, const Eigen::VectorXd& s,
                        const BackgroundStats& stats) {
  if (s.norm() < kZeroNorm) {
    throw ZeroSignatureError("signature is the zero vector");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance);
  const Eigen::VectorXd centered = x - stats.mean;
  const Eigen::VectorXd sol_x = llt.solve(centered);
  const double denom_x = centered.dot(sol_x);
  if (denom_x < kZeroNorm * kZeroNorm) {
    throw ZeroVectorError("instance coincides with the background mean");
  }
  return s.dot(sol_x) / (std::sqrt(s.dot(llt.solve(s))) * std::sqrt(denom_x));
}

DetectionScores score_dataset(const std::vector<Instance>& instances,
                              const TargetSignature& sig) {
  DetectionScores out;
  out.mode = sig.mode;
  out.scores.reserve(instances.size());

  const bool augmented = sig.mode == Mode::LinearDiscriminant;
  const bool normalize = sig.mode == Mode::Ace;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    try {
      Instance x = instances[i];
      if (augmented) {
        x.conservativeResize(x.size() + 1);
        x[x.size() - 1] = 1.0;
      }
      const auto w = whiten(x, sig.stats, normalize);
      out.scores.push_back(
          sig.whitened.dot(normalize ? *w.normalized : w.whitened));
    } catch (const Error& e) {
      throw AlgorithmError("instance " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace miace
