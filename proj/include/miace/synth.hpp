#pragma once

#include <cstdint>
#include <vector>

#include "miace/types.hpp"

namespace miace {

enum class EndmemberKind { SmoothSpectra, Simplex2d };

std::string to_string(EndmemberKind kind);
EndmemberKind endmember_kind_from_string(const std::string& name);

// Pure material signatures for the linear mixing model. smooth-spectra are
// nonnegative band-limited random curves with pairwise angles >= 15
// degrees; simplex-2d returns fixed triangle vertices (target first) for
// the two-dimensional experiments.
std::vector<Eigen::VectorXd> make_endmembers(EndmemberKind kind,
                                             Eigen::Index d, int count,
                                             std::uint64_t seed);

struct SyntheticConfig {
  std::vector<Eigen::VectorXd> endmembers;  // first is the target
  int n_pos_bags = 10;
  int n_neg_bags = 10;
  int instances_per_bag = 10;
  int targets_per_positive_bag = 2;
  double mean_target_proportion = 0.15;
  double proportion_concentration = 20.0;  // Beta concentration for alpha
  double snr_db = 20.0;                    // +infinity disables noise
  // Which background endmembers may mix with the target; empty = all.
  std::vector<std::uint8_t> background_mask;
  std::uint64_t seed = 0;

  // Throws ConfigError listing every violated field.
  void validate() const;
};

struct InstanceTruth {
  std::string bag_id;
  double alpha_target = 0.0;  // convex weight of the target endmember
  bool is_target = false;
};

struct SyntheticDataset {
  BagSet bags;
  std::vector<InstanceTruth> truth;  // aligned with bag/instance file order
  // Pre-noise convex weights over all endmembers, per instance.
  std::vector<Eigen::VectorXd> proportions;
  Eigen::VectorXd true_signature;
};

// Bags under the linear mixing model: background instances are convex
// combinations of a uniformly chosen endmember subset with uniform
// Dirichlet proportions; target instances fold in the target endmember
// with proportion alpha drawn around mean_target_proportion. Gaussian
// noise is added last to meet snr_db. Deterministic given the seed.
SyntheticDataset generate(const SyntheticConfig& config);

// Flat labeled instance set (no bag structure) from the same samplers:
// n_pos target instances and n_neg background instances. Used for the
// held-out test pools.
struct InstancePool {
  std::vector<Instance> instances;
  std::vector<int> labels;
  std::vector<double> alphas;
};

InstancePool generate_instance_pool(const std::vector<Eigen::VectorXd>& endmembers,
                                    int n_pos, int n_neg,
                                    double mean_target_proportion,
                                    double proportion_concentration,
                                    double snr_db,
                                    const std::vector<std::uint8_t>& background_mask,
                                    std::uint64_t seed);

}  // namespace miace
