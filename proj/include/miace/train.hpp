#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "miace/detectors.hpp"

namespace miace {

struct TrainConfig {
  Mode mode = Mode::Ace;
  int max_iterations = 100;
  WhitenScope scope = WhitenScope::NegativeOnly;
  std::optional<double> epsilon;  // nullopt = default ridge
  bool keep_trace = false;
};

// Bags mapped into the space the optimization runs in: whitened
// (and normalized for ACE), or raw instances with a constant-1 coordinate
// for the linear-discriminant variant. Columns are instances. The negative
// term of the objective is fixed for the life of the run and precomputed.
struct PreparedBags {
  std::vector<Eigen::MatrixXd> positive;
  std::vector<Eigen::MatrixXd> negative;
  Eigen::VectorXd negative_term;

  Eigen::Index dimension() const { return negative_term.size(); }
};

PreparedBags prepare_bags(const BagSet& bags, const BackgroundStats& stats,
                          Mode mode);
PreparedBags prepare_bags_augmented(const BagSet& bags);

// One selected instance index per positive bag (the x*_j).
struct SelectionState {
  std::vector<Eigen::Index> selected;

  bool operator==(const SelectionState&) const = default;
  std::uint64_t hash() const;
};

// Mean of the per-bag best responses minus the precomputed negative term:
// (1/N+) sum_j max_i s^T v_ji - (1/N-) sum_j (1/N_j) sum_i s^T v_ji.
double objective(const Eigen::VectorXd& s_hat, const PreparedBags& bags);

// Objective with the positive-bag instances pinned to `selection`.
double objective(const Eigen::VectorXd& s_hat, const PreparedBags& bags,
                 const SelectionState& selection);

// Per positive bag, the index of the instance with the maximum response;
// ties break to the lowest index.
SelectionState select_instances(const Eigen::VectorXd& s_hat,
                                const PreparedBags& bags);

// Closed-form maximizer for a fixed selection: s = t / |t| with
// t = mean of selected instances - negative term. A vanishing t means the
// positive and negative means coincide and is an error.
Eigen::VectorXd update_signature(const SelectionState& selection,
                                 const PreparedBags& bags);

// Evaluates the objective at every (normalized) positive-bag instance and
// returns the best; ties break to the first in bag order. Instances at the
// background mean are skipped.
Eigen::VectorXd initialize_signature(const PreparedBags& bags);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  std::uint64_t selection_hash = 0;
};

struct TrainResult {
  TargetSignature signature;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

// Alternating instance selection and closed-form signature update.
// Terminates when a selection map repeats (contiguously or not) or at
// max_iterations; the returned signature is back-transformed into the
// original space.
TrainResult train(const BagSet& bags, const TrainConfig& config);

// Same loop on raw instances with a constant-1 coordinate appended; no
// whitening or normalization. The result is a (d+1)-vector of weights
// plus bias under identity background statistics.
TrainResult train_linear_discriminant(const BagSet& bags,
                                      const TrainConfig& config);

}  // namespace miace
