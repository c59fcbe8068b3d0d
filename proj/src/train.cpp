#include "miace/train.hpp"

#include <cmath>
#include <set>

namespace miace {

namespace {

constexpr double kZeroNorm = 1e-12;

Eigen::VectorXd negative_mean_term(const std::vector<Eigen::MatrixXd>& negative,
                                   Eigen::Index d) {
  Eigen::VectorXd term = Eigen::VectorXd::Zero(d);
  for (const auto& bag : negative) {
    term += bag.rowwise().mean();
  }
  return term / static_cast<double>(negative.size());
}

}  // namespace

PreparedBags prepare_bags(const BagSet& bags, const BackgroundStats& stats,
                          Mode mode) {
  bags.require_both_labels();
  const bool normalize = mode == Mode::Ace;
  PreparedBags out;
  for (const auto& bag : bags.bags()) {
    Eigen::MatrixXd m(stats.dimension(),
                      static_cast<Eigen::Index>(bag.instances.size()));
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      const auto w = whiten(bag.instances[i], stats, normalize);
      m.col(static_cast<Eigen::Index>(i)) =
          normalize ? *w.normalized : w.whitened;
    }
    (bag.positive ? out.positive : out.negative).push_back(std::move(m));
  }
  out.negative_term = negative_mean_term(out.negative, stats.dimension());
  return out;
}

PreparedBags prepare_bags_augmented(const BagSet& bags) {
  bags.require_both_labels();
  const Eigen::Index d = bags.dimension() + 1;
  PreparedBags out;
  for (const auto& bag : bags.bags()) {
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(bag.instances.size()));
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      m.col(static_cast<Eigen::Index>(i)).head(d - 1) = bag.instances[i];
      m(d - 1, static_cast<Eigen::Index>(i)) = 1.0;
    }
    (bag.positive ? out.positive : out.negative).push_back(std::move(m));
  }
  out.negative_term = negative_mean_term(out.negative, d);
  return out;
}

std::uint64_t SelectionState::hash() const {
  // FNV-1a over the index sequence.
  std::uint64_t h = 1469598103934665603ull;
  for (const Eigen::Index idx : selected) {
    auto v = static_cast<std::uint64_t>(idx);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

double objective(const Eigen::VectorXd& s_hat, const PreparedBags& bags) {
  double positive_term = 0.0;
  for (const auto& bag : bags.positive) {
    positive_term += (bag.transpose() * s_hat).maxCoeff();
  }
  positive_term /= static_cast<double>(bags.positive.size());
  return positive_term - s_hat.dot(bags.negative_term);
}

double objective(const Eigen::VectorXd& s_hat, const PreparedBags& bags,
                 const SelectionState& selection) {
  if (selection.selected.size() != bags.positive.size()) {
    throw ConfigError("selection size does not match positive bag count");
  }
  double positive_term = 0.0;
  for (std::size_t j = 0; j < bags.positive.size(); ++j) {
    positive_term += bags.positive[j].col(selection.selected[j]).dot(s_hat);
  }
  positive_term /= static_cast<double>(bags.positive.size());
  return positive_term - s_hat.dot(bags.negative_term);
}

SelectionState select_instances(const Eigen::VectorXd& s_hat,
                                const PreparedBags& bags) {
  SelectionState state;
  state.selected.reserve(bags.positive.size());
  for (const auto& bag : bags.positive) {
    Eigen::Index best = 0;
    // maxCoeff with an index ties to the lowest index already; spelled out
    // so the tie rule is explicit.
    const Eigen::VectorXd scores = bag.transpose() * s_hat;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    state.selected.push_back(best);
  }
  return state;
}

Eigen::VectorXd update_signature(const SelectionState& selection,
                                 const PreparedBags& bags) {
  if (selection.selected.size() != bags.positive.size()) {
    throw ConfigError("selection size does not match positive bag count");
  }
  Eigen::VectorXd t = Eigen::VectorXd::Zero(bags.dimension());
  for (std::size_t j = 0; j < bags.positive.size(); ++j) {
    const Eigen::Index idx = selection.selected[j];
    if (idx < 0 || idx >= bags.positive[j].cols()) {
      throw ConfigError("selected index out of range for positive bag " +
                        std::to_string(j));
    }
    t += bags.positive[j].col(idx);
  }
  t /= static_cast<double>(bags.positive.size());
  t -= bags.negative_term;

  const double norm = t.norm();
  if (norm < kZeroNorm) {
    throw DegenerateUpdateError(
        "signature update degenerated: selected-positive mean equals the "
        "negative mean");
  }
  return t / norm;
}

Eigen::VectorXd initialize_signature(const PreparedBags& bags) {
  Eigen::VectorXd best;
  double best_value = 0.0;
  for (const auto& bag : bags.positive) {
    for (Eigen::Index i = 0; i < bag.cols(); ++i) {
      Eigen::VectorXd candidate = bag.col(i);
      const double norm = candidate.norm();
      if (norm < kZeroNorm) continue;  // at the background mean
      candidate /= norm;
      const double value = objective(candidate, bags);
      if (best.size() == 0 || value > best_value) {
        best = std::move(candidate);
        best_value = value;
      }
    }
  }
  if (best.size() == 0) {
    throw AlgorithmError(
        "no valid initialization candidate: every positive instance sits at "
        "the background mean");
  }
  return best;
}

namespace {

TrainResult run_alternation(const PreparedBags& prepared,
                            const TrainConfig& config) {
  Eigen::VectorXd s_hat = initialize_signature(prepared);

  TrainResult result;
  std::set<std::vector<Eigen::Index>> seen;
  SelectionState selection = select_instances(s_hat, prepared);
  int iteration = 0;
  while (true) {
    if (seen.contains(selection.selected)) {
      // A repeated selection map reproduces a previous signature: done.
      result.converged = true;
      break;
    }
    if (iteration >= config.max_iterations) break;
    seen.insert(selection.selected);
    ++iteration;
    s_hat = update_signature(selection, prepared);
    if (config.keep_trace) {
      result.trace.push_back(
          {iteration, objective(s_hat, prepared, selection), selection.hash()});
    }
    selection = select_instances(s_hat, prepared);
  }

  result.iterations = iteration;
  result.objective = objective(s_hat, prepared);
  result.signature.whitened = s_hat;
  return result;
}

}  // namespace

TrainResult train(const BagSet& bags, const TrainConfig& config) {
  if (config.max_iterations < 1) {
    throw ConfigError("max_iterations must be >= 1");
  }
  if (config.mode == Mode::LinearDiscriminant) {
    return train_linear_discriminant(bags, config);
  }
  bags.require_both_labels();

  const BackgroundStats stats =
      compute_background_stats(bags, config.scope, config.epsilon);
  const PreparedBags prepared = prepare_bags(bags, stats, config.mode);

  TrainResult result = run_alternation(prepared, config);
  result.signature.mode = config.mode;
  result.signature.stats = stats;
  result.signature.signature =
      unwhiten_signature(result.signature.whitened, stats);
  return result;
}

TrainResult train_linear_discriminant(const BagSet& bags,
                                      const TrainConfig& config) {
  if (config.max_iterations < 1) {
    throw ConfigError("max_iterations must be >= 1");
  }
  bags.require_both_labels();

  const PreparedBags prepared = prepare_bags_augmented(bags);
  TrainResult result = run_alternation(prepared, config);
  result.signature.mode = Mode::LinearDiscriminant;
  result.signature.stats = BackgroundStats::identity(prepared.dimension());
  result.signature.signature = result.signature.whitened;
  return result;
}

}  // namespace miace
