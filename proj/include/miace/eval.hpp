#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "miace/background.hpp"
#include "miace/synth.hpp"
#include "miace/types.hpp"

namespace miace {

struct RocPoint {
  double far = 0.0;  // false alarms per negative instance
  double pd = 0.0;   // detection rate
};

// Threshold sweep at distinct score values, ties grouped. Starts at (0,0),
// ends at (1,1); both coordinates nondecreasing.
struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
};

RocCurve roc_curve(const std::vector<double>& scores,
                   const std::vector<int>& labels);

// Trapezoidal area over the full FAR range, in [0, 1].
double auc(const RocCurve& curve);

// Trapezoidal area restricted to FAR in [0, far_max] (linear interpolation
// at the cut), divided by far_max. 1 means full detection with no false
// alarms up to that rate.
double nauc(const RocCurve& curve, double far_max);

// Lloyd k-means (squared Euclidean) over the instances; each cluster
// becomes one negative bag. Empty clusters are reseeded from the point
// farthest from its centroid. Deterministic given the seed. When given,
// `wss_trace` receives the within-cluster sum of squares per iteration.
std::vector<Bag> kmeans_negative_bags(const std::vector<Instance>& instances,
                                      int k, std::uint64_t seed,
                                      std::vector<double>* wss_trace = nullptr);

// One experiment table: a base generation setup, a parameter sweep, a list
// of algorithms, and a metric aggregated over seeded runs.
struct ExperimentSpec {
  // endmembers
  EndmemberKind endmember_kind = EndmemberKind::SmoothSpectra;
  Eigen::Index dimension = 64;
  int n_endmembers = 4;

  // training-data shape
  int n_bags = 50;
  double positive_bag_fraction = 0.5;
  int instances_per_bag = 10;
  int targets_per_positive_bag = 2;
  double train_target_proportion = 0.05;
  double proportion_concentration = 20.0;
  double snr_db = 20.0;
  std::vector<std::uint8_t> background_mask;

  // held-out pool; ignored when score_train is set
  int test_positives = 2500;
  int test_negatives = 2500;
  double test_target_proportion = 0.15;
  bool score_train = false;  // score the training instances instead

  // protocol
  std::vector<std::string> algorithms;  // mi-smf mi-ace smf-true ace-true
                                        // emdd emdd-p lindisc
  int runs = 10;
  std::string metric = "auc";  // auc | nauc
  double far_max = 1e-3;
  WhitenScope scope = WhitenScope::NegativeOnly;
  int max_iterations = 100;

  // sweep: empty = single cell; otherwise one cell per value of
  // pos_bag_fraction | targets_per_bag | target_proportion
  std::string vary;
  std::vector<double> vary_values;

  std::uint64_t master_seed = 1;

  void validate() const;
};

struct ExperimentRow {
  std::string cell;
  std::string algorithm;
  double mean = 0.0;
  double stddev = 0.0;
  double mean_runtime_s = 0.0;
  int runs_completed = 0;
  std::string error;  // first failure message, when any run failed
};

struct RocDump {
  std::string cell;
  std::string algorithm;
  RocCurve curve;  // first run of the cell
};

struct ExperimentResults {
  std::vector<ExperimentRow> rows;
  std::vector<RocDump> roc_dumps;
};

// Generates train/test with run-indexed seeds, trains each algorithm,
// scores, and aggregates mean/std of the metric plus per-run training
// time. Per-run failures are recorded on the row and the remaining work
// proceeds.
ExperimentResults run_experiment(const ExperimentSpec& spec);

// Deterministic stream splitter for run seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace miace
