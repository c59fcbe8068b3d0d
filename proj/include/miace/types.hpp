#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace miace {

// A single feature vector (e.g. one pixel's spectrum).
using Instance = Eigen::VectorXd;

// Detector family. LinearDiscriminant reuses the SMF scoring rule on
// 1-augmented inputs with identity background statistics.
enum class Mode { Smf, Ace, LinearDiscriminant };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

// Base for all library errors. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or malformed input values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File-system and parse failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Degenerate data detected by an algorithm (singular covariance,
// zero vectors, uninformative bags, single-class labels, ...).
class AlgorithmError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public AlgorithmError {
 public:
  using AlgorithmError::AlgorithmError;
};

class SingularCovarianceError : public AlgorithmError {
 public:
  using AlgorithmError::AlgorithmError;
};

class ZeroVectorError : public AlgorithmError {
 public:
  using AlgorithmError::AlgorithmError;
};

class ZeroSignatureError : public AlgorithmError {
 public:
  using AlgorithmError::AlgorithmError;
};

class DegenerateUpdateError : public AlgorithmError {
 public:
  using AlgorithmError::AlgorithmError;
};

class DegenerateLabelsError : public AlgorithmError {
 public:
  using AlgorithmError::AlgorithmError;
};

// A labeled multiset of instances. Positive bags contain at least one
// target instance; negative bags contain none.
struct Bag {
  std::string id;
  bool positive = false;
  std::vector<Instance> instances;

  Eigen::Index dimension() const {
    return instances.empty() ? 0 : instances.front().size();
  }
};

// A training or test collection of bags sharing one feature dimension.
class BagSet {
 public:
  BagSet() = default;
  explicit BagSet(std::vector<Bag> bags);

  // Enforces nonempty bags and a consistent dimension.
  void add_bag(Bag bag);

  const std::vector<Bag>& bags() const { return bags_; }
  Eigen::Index dimension() const { return dimension_; }

  std::size_t n_positive_bags() const;
  std::size_t n_negative_bags() const;
  std::size_t total_instances() const;

  // All instances in file order (bag order, then index within bag).
  std::vector<Instance> all_instances() const;
  std::vector<Instance> negative_instances() const;

  // Throws ConfigError unless the set has >= 1 positive and >= 1
  // negative bag; training entry points call this.
  void require_both_labels() const;

 private:
  std::vector<Bag> bags_;
  Eigen::Index dimension_ = 0;
};

void require_finite(const Eigen::VectorXd& v, const std::string& what);

}  // namespace miace
