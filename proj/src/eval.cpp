#include "miace/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "miace/detectors.hpp"
#include "miace/emdd.hpp"
#include "miace/train.hpp"

namespace miace {

RocCurve roc_curve(const std::vector<double>& scores,
                   const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ConfigError("scores and labels differ in length");
  }
  RocCurve curve;
  for (const int label : labels) {
    (label != 0 ? curve.n_positive : curve.n_negative) += 1;
  }
  if (curve.n_positive == 0 || curve.n_negative == 0) {
    throw DegenerateLabelsError(
        "ROC needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // All instances sharing a score value flip together.
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back(
        {static_cast<double>(fp) / static_cast<double>(curve.n_negative),
         static_cast<double>(tp) / static_cast<double>(curve.n_positive)});
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.far - a.far) * 0.5 * (a.pd + b.pd);
  }
  return area;
}

double nauc(const RocCurve& curve, double far_max) {
  if (!(far_max > 0.0)) throw ConfigError("far_max must be > 0");
  double area = 0.0;
  double last_far = 0.0;
  double last_pd = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    if (b.far >= far_max) {
      // Cut this segment at far_max.
      const double span = b.far - a.far;
      const double pd_cut =
          span > 0.0 ? a.pd + (b.pd - a.pd) * (far_max - a.far) / span : a.pd;
      area += (far_max - a.far) * 0.5 * (a.pd + pd_cut);
      return area / far_max;
    }
    area += (b.far - a.far) * 0.5 * (a.pd + b.pd);
    last_far = b.far;
    last_pd = b.pd;
  }
  // far_max beyond the curve: detection stays at the final rate.
  area += (far_max - last_far) * last_pd;
  return area / far_max;
}

std::vector<Bag> kmeans_negative_bags(const std::vector<Instance>& instances,
                                      int k, std::uint64_t seed,
                                      std::vector<double>* wss_trace) {
  const int n = static_cast<int>(instances.size());
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (k > n) {
    throw ConfigError("kmeans: k = " + std::to_string(k) + " exceeds " +
                      std::to_string(n) + " instances");
  }
  const Eigen::Index d = instances.front().size();

  // Seeded uniform sample of distinct instances as initial centroids.
  std::mt19937_64 rng(seed);
  std::vector<int> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(indices[static_cast<std::size_t>(i)],
              indices[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<Eigen::VectorXd> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    centroids.push_back(instances[static_cast<std::size_t>(indices[c])]);
  }

  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    std::vector<double> best_dist(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dist =
            (instances[static_cast<std::size_t>(i)] - centroids[c])
                .squaredNorm();
        if (dist < bd) {
          bd = dist;
          best = c;
        }
      }
      best_dist[static_cast<std::size_t>(i)] = bd;
      if (assignment[static_cast<std::size_t>(i)] != best) {
        assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }

    if (wss_trace) {
      double wss = 0.0;
      for (const double dist : best_dist) wss += dist;
      wss_trace->push_back(wss);
    }

    // Reseed any empty cluster from the farthest point.
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (const int a : assignment) counts[static_cast<std::size_t>(a)] += 1;
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      int farthest = 0;
      for (int i = 1; i < n; ++i) {
        if (best_dist[static_cast<std::size_t>(i)] >
            best_dist[static_cast<std::size_t>(farthest)]) {
          farthest = i;
        }
      }
      centroids[c] = instances[static_cast<std::size_t>(farthest)];
      counts[assignment[static_cast<std::size_t>(farthest)]] -= 1;
      assignment[static_cast<std::size_t>(farthest)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      best_dist[static_cast<std::size_t>(farthest)] = 0.0;
      reseeded = true;
    }

    if (!changed && !reseeded) break;

    for (int c = 0; c < k; ++c) {
      centroids[c] = Eigen::VectorXd::Zero(d);
    }
    for (int i = 0; i < n; ++i) {
      centroids[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])] +=
          instances[static_cast<std::size_t>(i)];
    }
    for (int c = 0; c < k; ++c) {
      centroids[c] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }

  std::vector<Bag> bags(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    std::ostringstream id;
    id << "negk" << c;
    bags[static_cast<std::size_t>(c)].id = id.str();
    bags[static_cast<std::size_t>(c)].positive = false;
  }
  for (int i = 0; i < n; ++i) {
    bags[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])]
        .instances.push_back(instances[static_cast<std::size_t>(i)]);
  }
  return bags;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 step over seed xor salt.
  std::uint64_t z = seed ^ (salt * 0x9e3779b97f4a7c15ull);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void ExperimentSpec::validate() const {
  std::vector<std::string> violations;
  if (runs < 1) violations.push_back("runs: must be >= 1");
  if (algorithms.empty()) violations.push_back("algorithms: none given");
  static const std::set<std::string> known = {
      "mi-smf", "mi-ace", "smf-true", "ace-true", "emdd", "emdd-p", "lindisc"};
  for (const auto& a : algorithms) {
    if (!known.contains(a)) violations.push_back("algorithms: unknown '" + a + "'");
  }
  if (metric != "auc" && metric != "nauc") {
    violations.push_back("metric: expected auc|nauc");
  }
  if (!(far_max > 0.0)) violations.push_back("far_max: must be > 0");
  if (n_bags < 2) violations.push_back("n_bags: must be >= 2");
  if (!(positive_bag_fraction > 0.0 && positive_bag_fraction < 1.0)) {
    violations.push_back("positive_bag_fraction: must lie in (0, 1)");
  }
  if (!vary.empty() && vary != "pos_bag_fraction" &&
      vary != "targets_per_bag" && vary != "target_proportion") {
    violations.push_back("vary: unknown parameter '" + vary + "'");
  }
  if (!vary.empty() && vary_values.empty()) {
    violations.push_back("vary_values: none given");
  }
  if (!score_train && (test_positives < 1 || test_negatives < 1)) {
    violations.push_back("test pool sizes must be >= 1");
  }
  if (!violations.empty()) {
    std::string msg = "invalid experiment spec:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
}

namespace {

struct Cell {
  std::string label;
  SyntheticConfig config;  // seed filled per run
};

SyntheticConfig base_config(const ExperimentSpec& spec,
                            const std::vector<Eigen::VectorXd>& endmembers) {
  SyntheticConfig cfg;
  cfg.endmembers = endmembers;
  const int n_pos = std::max(
      1, static_cast<int>(std::lround(spec.positive_bag_fraction *
                                      static_cast<double>(spec.n_bags))));
  cfg.n_pos_bags = n_pos;
  cfg.n_neg_bags = std::max(1, spec.n_bags - n_pos);
  cfg.instances_per_bag = spec.instances_per_bag;
  cfg.targets_per_positive_bag = spec.targets_per_positive_bag;
  cfg.mean_target_proportion = spec.train_target_proportion;
  cfg.proportion_concentration = spec.proportion_concentration;
  cfg.snr_db = spec.snr_db;
  cfg.background_mask = spec.background_mask;
  return cfg;
}

std::vector<Cell> make_cells(const ExperimentSpec& spec,
                             const std::vector<Eigen::VectorXd>& endmembers) {
  std::vector<Cell> cells;
  if (spec.vary.empty()) {
    cells.push_back({"base", base_config(spec, endmembers)});
    return cells;
  }
  for (const double value : spec.vary_values) {
    ExperimentSpec varied = spec;
    if (spec.vary == "pos_bag_fraction") {
      varied.positive_bag_fraction = value;
    } else if (spec.vary == "targets_per_bag") {
      varied.targets_per_positive_bag = static_cast<int>(std::lround(value));
    } else {  // target_proportion
      varied.train_target_proportion = value;
    }
    std::ostringstream label;
    label << spec.vary << "=" << value;
    cells.push_back({label.str(), base_config(varied, endmembers)});
  }
  return cells;
}

std::vector<double> run_algorithm(const std::string& algorithm,
                                  const BagSet& train_bags,
                                  const std::vector<Instance>& test_instances,
                                  const ExperimentSpec& spec,
                                  const Eigen::VectorXd& true_target,
                                  double& runtime_s) {
  const auto t0 = std::chrono::steady_clock::now();
  TargetSignature sig;
  DDConcept dd;
  bool use_concept = false;

  if (algorithm == "mi-smf" || algorithm == "mi-ace" ||
      algorithm == "lindisc") {
    TrainConfig cfg;
    cfg.mode = algorithm == "mi-smf"   ? Mode::Smf
               : algorithm == "mi-ace" ? Mode::Ace
                                       : Mode::LinearDiscriminant;
    cfg.scope = spec.scope;
    cfg.max_iterations = spec.max_iterations;
    sig = train(train_bags, cfg).signature;
  } else if (algorithm == "smf-true" || algorithm == "ace-true") {
    // The known-signature baseline, mean-subtracted before detection.
    const auto stats = compute_background_stats(train_bags, spec.scope);
    sig = make_signature(true_target - stats.mean, stats,
                         algorithm == "smf-true" ? Mode::Smf : Mode::Ace);
  } else {  // emdd | emdd-p
    dd = emdd_train(train_bags, algorithm == "emdd").dd;
    use_concept = true;
  }
  runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count();

  if (use_concept) {
    std::vector<double> scores;
    scores.reserve(test_instances.size());
    for (const auto& x : test_instances) {
      scores.push_back(emdd_predict(x, dd));
    }
    return scores;
  }
  return score_dataset(test_instances, sig).scores;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

ExperimentResults run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto endmembers =
      make_endmembers(spec.endmember_kind, spec.dimension, spec.n_endmembers,
                      mix_seed(spec.master_seed, 0xE17D));
  const Eigen::VectorXd true_target = endmembers.front();
  const auto cells = make_cells(spec, endmembers);

  ExperimentResults results;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    for (const auto& algorithm : spec.algorithms) {
      ExperimentRow row;
      row.cell = cells[ci].label;
      row.algorithm = algorithm;
      std::vector<double> metrics;
      std::vector<double> runtimes;
      for (int run = 0; run < spec.runs; ++run) {
        try {
          SyntheticConfig cfg = cells[ci].config;
          cfg.seed = mix_seed(spec.master_seed, 1000 * (ci + 1) + run);
          const SyntheticDataset train_data = generate(cfg);

          std::vector<Instance> test_instances;
          std::vector<int> test_labels;
          if (spec.score_train) {
            test_instances = train_data.bags.all_instances();
            for (const auto& t : train_data.truth) {
              test_labels.push_back(t.is_target ? 1 : 0);
            }
          } else {
            const auto pool = generate_instance_pool(
                endmembers, spec.test_positives, spec.test_negatives,
                spec.test_target_proportion, spec.proportion_concentration,
                spec.snr_db, spec.background_mask,
                mix_seed(spec.master_seed, 500000 + 1000 * (ci + 1) + run));
            test_instances = pool.instances;
            test_labels = pool.labels;
          }

          double runtime_s = 0.0;
          const auto scores =
              run_algorithm(algorithm, train_data.bags, test_instances, spec,
                            true_target, runtime_s);
          const RocCurve curve = roc_curve(scores, test_labels);
          metrics.push_back(spec.metric == "auc" ? auc(curve)
                                                 : nauc(curve, spec.far_max));
          runtimes.push_back(runtime_s);
          if (run == 0) {
            results.roc_dumps.push_back({row.cell, algorithm, curve});
          }
        } catch (const std::exception& e) {
          if (row.error.empty()) row.error = e.what();
        }
      }
      row.runs_completed = static_cast<int>(metrics.size());
      if (!metrics.empty()) {
        row.mean = mean_of(metrics);
        row.stddev = stddev_of(metrics, row.mean);
        row.mean_runtime_s = mean_of(runtimes);
      }
      results.rows.push_back(std::move(row));
    }
  }
  return results;
}

}  // namespace miace
