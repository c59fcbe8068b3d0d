#pragma once

#include <vector>

#include "miace/types.hpp"

namespace miace {

// Diverse Density concept: a point in feature space plus nonnegative
// per-dimension scales. EM-DD-P fixes the scales at all-ones.
struct DDConcept {
  Eigen::VectorXd point;
  Eigen::VectorXd scales;

  Eigen::Index dimension() const { return point.size(); }
};

struct EmddConfig {
  int max_em_iterations = 500;
  int max_gradient_steps = 100;
  double tolerance = 1e-8;  // stop when likelihood improves less than this
};

struct EmddResult {
  DDConcept dd;
  int em_iterations = 0;
  double log_likelihood = 0.0;
};

// Noisy-OR objective: product over positive bags of
// (1 - prod_i (1 - exp(-|x_i - s|^2))) times product over negative
// instances of (1 - exp(-|x_i - s|^2)). Evaluated in log space; the
// returned value is the probability in [0, 1].
double dd_objective(const Eigen::VectorXd& s, const BagSet& bags);

// exp(-sum_d scales_d (x_d - point_d)^2), in (0, 1].
double emdd_predict(const Instance& x, const DDConcept& dd);

// Log-likelihood of the concept on one selected instance per bag
// (positives contribute log P, negatives log(1 - P)) and its analytic
// gradient with respect to [point; scales].
double emdd_loglik(const DDConcept& dd,
                   const std::vector<Instance>& selected_positive,
                   const std::vector<Instance>& selected_negative);
void emdd_loglik_grad(const DDConcept& dd,
                      const std::vector<Instance>& selected_positive,
                      const std::vector<Instance>& selected_negative,
                      Eigen::VectorXd& grad_point,
                      Eigen::VectorXd& grad_scales);

// E-step: per bag, the instance with the largest prediction under the
// concept. For negatives this is the most dangerous representative.
struct EmddSelection {
  std::vector<Instance> positive;
  std::vector<Instance> negative;
};
EmddSelection emdd_select(const BagSet& bags, const DDConcept& dd);

// EM alternation: per bag, select the instance with the largest prediction
// (for negatives this is the most dangerous representative), then ascend
// the restricted log-likelihood with projected backtracking gradient
// steps. The point initializes at the positive instance maximizing the
// Noisy-OR objective; scales initialize at one and stay exactly one unless
// estimate_scales is set.
EmddResult emdd_train(const BagSet& bags, bool estimate_scales,
                      const EmddConfig& config = {});

}  // namespace miace
