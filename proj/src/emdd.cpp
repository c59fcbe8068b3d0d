#include "miace/emdd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace miace {

namespace {

// log(1 - exp(z)) for z <= 0.
double log1mexp(double z) {
  if (z >= 0.0) return -std::numeric_limits<double>::infinity();
  return z > -0.6931471805599453 ? std::log(-std::expm1(z))
                                 : std::log1p(-std::exp(z));
}

double log_predict(const Instance& x, const DDConcept& dd) {
  return -(dd.scales.array() *
           (x - dd.point).array().square())
              .sum();
}

void check_concept_dims(const Instance& x, const DDConcept& dd) {
  if (x.size() != dd.point.size() ||
      dd.point.size() != dd.scales.size()) {
    throw ConfigError("concept/instance dimensions do not match");
  }
}

}  // namespace

double dd_objective(const Eigen::VectorXd& s, const BagSet& bags) {
  if (bags.bags().empty()) throw ConfigError("dd_objective: no bags");
  if (s.size() != bags.dimension()) {
    throw ConfigError("dd_objective: dd dimension mismatch");
  }
  double log_obj = 0.0;
  for (const auto& bag : bags.bags()) {
    if (bag.positive) {
      // log(1 - prod_i (1 - P_i)) with the product carried in log space.
      double log_prod_misses = 0.0;
      for (const auto& x : bag.instances) {
        log_prod_misses += log1mexp(-(x - s).squaredNorm());
      }
      log_obj += log1mexp(log_prod_misses);
    } else {
      for (const auto& x : bag.instances) {
        log_obj += log1mexp(-(x - s).squaredNorm());
      }
    }
  }
  return std::exp(log_obj);
}

double emdd_predict(const Instance& x, const DDConcept& dd) {
  check_concept_dims(x, dd);
  return std::exp(log_predict(x, dd));
}

double emdd_loglik(const DDConcept& dd,
                   const std::vector<Instance>& selected_positive,
                   const std::vector<Instance>& selected_negative) {
  double ll = 0.0;
  for (const auto& x : selected_positive) {
    ll += log_predict(x, dd);
  }
  for (const auto& x : selected_negative) {
    ll += log1mexp(log_predict(x, dd));
  }
  return ll;
}

void emdd_loglik_grad(const DDConcept& dd,
                      const std::vector<Instance>& selected_positive,
                      const std::vector<Instance>& selected_negative,
                      Eigen::VectorXd& grad_point,
                      Eigen::VectorXd& grad_scales) {
  const Eigen::Index d = dd.dimension();
  grad_point = Eigen::VectorXd::Zero(d);
  grad_scales = Eigen::VectorXd::Zero(d);
  for (const auto& x : selected_positive) {
    const Eigen::ArrayXd diff = (x - dd.point).array();
    grad_point.array() += 2.0 * dd.scales.array() * diff;
    grad_scales.array() -= diff.square();
  }
  for (const auto& x : selected_negative) {
    const Eigen::ArrayXd diff = (x - dd.point).array();
    const double z = log_predict(x, dd);
    // d/dtheta log(1 - e^z) = -e^z / (1 - e^z) * dz/dtheta
    const double ratio = 1.0 / std::expm1(-z);
    grad_point.array() -= ratio * 2.0 * dd.scales.array() * diff;
    grad_scales.array() += ratio * diff.square();
  }
}

EmddSelection emdd_select(const BagSet& bags, const DDConcept& dd) {
  EmddSelection sel;
  for (const auto& bag : bags.bags()) {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      const double v = log_predict(bag.instances[i], dd);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    // Positives: the instance most likely to be the target example.
    // Negatives: the most dangerous representative, same argmax.
    (bag.positive ? sel.positive : sel.negative)
        .push_back(bag.instances[best]);
  }
  return sel;
}

namespace {

// Projected gradient ascent with backtracking (Armijo c = 1e-4) on the
// restricted log-likelihood. Scales are clamped to >= 0 after each trial
// step; frozen scales pass a zero gradient through.
double m_step(DDConcept& dd, const EmddSelection& sel, bool estimate_scales,
              const EmddConfig& config, int em_iteration) {
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-12;

  double ll = emdd_loglik(dd, sel.positive, sel.negative);
  Eigen::VectorXd grad_point, grad_scales;
  for (int step = 0; step < config.max_gradient_steps; ++step) {
    emdd_loglik_grad(dd, sel.positive, sel.negative, grad_point,
                     grad_scales);
    if (!grad_point.allFinite() || !grad_scales.allFinite()) {
      throw AlgorithmError(
          "EM-DD gradient is non-finite at EM iteration " +
          std::to_string(em_iteration) + ", gradient step " +
          std::to_string(step) +
          " (a selected negative instance coincides with the concept)");
    }
    if (!estimate_scales) grad_scales.setZero();
    const double grad_sq = grad_point.squaredNorm() + grad_scales.squaredNorm();
    if (grad_sq < 1e-20) break;

    double eta = 1.0;
    bool accepted = false;
    while (eta >= kMinStep) {
      DDConcept trial = dd;
      trial.point += eta * grad_point;
      if (estimate_scales) {
        trial.scales =
            (trial.scales + eta * grad_scales).cwiseMax(0.0);
      }
      const double trial_ll = emdd_loglik(trial, sel.positive, sel.negative);
      const double directional =
          grad_point.dot(trial.point - dd.point) +
          grad_scales.dot(trial.scales - dd.scales);
      if (std::isfinite(trial_ll) && trial_ll >= ll + kArmijo * directional) {
        dd = trial;
        ll = trial_ll;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
  }
  return ll;
}

}  // namespace

EmddResult emdd_train(const BagSet& bags, bool estimate_scales,
                      const EmddConfig& config) {
  bags.require_both_labels();
  const Eigen::Index d = bags.dimension();

  // Initialize the point at the positive instance with the best Noisy-OR
  // objective; scales start at one.
  DDConcept dd;
  dd.scales = Eigen::VectorXd::Ones(d);
  double best_obj = -1.0;
  for (const auto& bag : bags.bags()) {
    if (!bag.positive) continue;
    for (const auto& x : bag.instances) {
      const double obj = dd_objective(x, bags);
      if (obj > best_obj) {
        best_obj = obj;
        dd.point = x;
      }
    }
  }

  EmddResult result;
  double previous_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= config.max_em_iterations; ++iter) {
    const EmddSelection sel = emdd_select(bags, dd);
    const double ll = m_step(dd, sel, estimate_scales, config, iter);
    result.em_iterations = iter;
    result.log_likelihood = ll;
    if (std::isfinite(previous_ll) &&
        std::abs(ll - previous_ll) < config.tolerance) {
      break;
    }
    previous_ll = ll;
  }
  result.dd = std::move(dd);
  return result;
}

}  // namespace miace
