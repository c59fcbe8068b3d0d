#include "miace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace miace {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinPairwiseAngleDeg = 15.0;

double angle_deg(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / kPi;
}

Eigen::VectorXd random_smooth_curve(Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double baseline = 0.05 + 0.25 * unif(rng);
  const int n_bumps = 2 + static_cast<int>(3.0 * unif(rng));  // 2..4
  Eigen::VectorXd curve = Eigen::VectorXd::Constant(d, baseline);
  for (int b = 0; b < n_bumps; ++b) {
    const double amp = 0.2 + 0.8 * unif(rng);
    const double center = unif(rng) * static_cast<double>(d - 1);
    const double width =
        (0.05 + 0.12 * unif(rng)) * static_cast<double>(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double u = (static_cast<double>(i) - center) / width;
      curve[i] += amp * std::exp(-0.5 * u * u);
    }
  }
  return curve;
}

// Dirichlet(1,...,1) over k coordinates via normalized exponentials.
Eigen::VectorXd uniform_dirichlet(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(
      std::numeric_limits<double>::min(), 1.0);
  Eigen::VectorXd w(k);
  for (int i = 0; i < k; ++i) w[i] = -std::log(unif(rng));
  return w / w.sum();
}

// k distinct values from `indices`, partial Fisher-Yates.
std::vector<int> sample_without_replacement(std::vector<int> indices, int k,
                                            std::mt19937_64& rng) {
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(
        i, static_cast<int>(indices.size()) - 1);
    std::swap(indices[i], indices[pick(rng)]);
  }
  indices.resize(k);
  return indices;
}

double beta_draw(double mean, double concentration, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(mean * concentration, 1.0);
  std::gamma_distribution<double> gb((1.0 - mean) * concentration, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

struct Mixer {
  const std::vector<Eigen::VectorXd>& endmembers;
  std::vector<int> all_background;      // indices into endmembers, excluding 0
  std::vector<int> target_background;   // subset allowed to mix with target

  // Returns the instance and fills the full proportion vector.
  Eigen::VectorXd background_instance(std::mt19937_64& rng,
                                      Eigen::VectorXd& proportions) const {
    return mix(all_background, rng, proportions);
  }

  Eigen::VectorXd target_instance(double alpha, std::mt19937_64& rng,
                                  Eigen::VectorXd& proportions) const {
    Eigen::VectorXd bg_prop;
    const Eigen::VectorXd bg = mix(target_background, rng, bg_prop);
    proportions = (1.0 - alpha) * bg_prop;
    proportions[0] = alpha;
    return alpha * endmembers[0] + (1.0 - alpha) * bg;
  }

 private:
  Eigen::VectorXd mix(const std::vector<int>& pool, std::mt19937_64& rng,
                      Eigen::VectorXd& proportions) const {
    std::uniform_int_distribution<int> count(1, static_cast<int>(pool.size()));
    const int k = count(rng);
    const auto chosen = sample_without_replacement(pool, k, rng);
    const Eigen::VectorXd weights = uniform_dirichlet(k, rng);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(endmembers.front().size());
    proportions = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(endmembers.size()));
    for (int i = 0; i < k; ++i) {
      x += weights[i] * endmembers[static_cast<std::size_t>(chosen[i])];
      proportions[chosen[i]] = weights[i];
    }
    return x;
  }
};

Mixer make_mixer(const SyntheticConfig& config) {
  Mixer mixer{config.endmembers, {}, {}};
  for (int i = 1; i < static_cast<int>(config.endmembers.size()); ++i) {
    mixer.all_background.push_back(i);
    const bool allowed = config.background_mask.empty() ||
                         config.background_mask[static_cast<std::size_t>(i - 1)];
    if (allowed) mixer.target_background.push_back(i);
  }
  return mixer;
}

void add_noise(std::vector<Instance>& instances, double snr_db,
               std::mt19937_64& rng) {
  if (std::isinf(snr_db)) return;
  double signal_power = 0.0;  // mean squared entry
  std::size_t n_entries = 0;
  for (const auto& x : instances) {
    signal_power += x.squaredNorm();
    n_entries += static_cast<std::size_t>(x.size());
  }
  signal_power /= static_cast<double>(n_entries);
  const double sigma =
      std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& x : instances) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += noise(rng);
  }
}

std::string padded_id(const char* prefix, int i) {
  std::ostringstream os;
  os << prefix << (i < 100 ? (i < 10 ? "00" : "0") : "") << i;
  return os.str();
}

}  // namespace

std::string to_string(EndmemberKind kind) {
  return kind == EndmemberKind::SmoothSpectra ? "smooth-spectra"
                                              : "simplex-2d";
}

EndmemberKind endmember_kind_from_string(const std::string& name) {
  if (name == "smooth-spectra") return EndmemberKind::SmoothSpectra;
  if (name == "simplex-2d") return EndmemberKind::Simplex2d;
  throw ConfigError("unknown endmember kind '" + name +
                    "' (expected smooth-spectra|simplex-2d)");
}

std::vector<Eigen::VectorXd> make_endmembers(EndmemberKind kind,
                                             Eigen::Index d, int count,
                                             std::uint64_t seed) {
  if (count < 2) throw ConfigError("make_endmembers: count must be >= 2");
  if (d < 2) throw ConfigError("make_endmembers: dimension must be >= 2");

  if (kind == EndmemberKind::Simplex2d) {
    if (d != 2) {
      throw ConfigError("simplex-2d endmembers require dimension 2");
    }
    if (count > 3) {
      throw ConfigError("simplex-2d provides at most 3 vertices");
    }
    // Target apex plus two background vertices on the base.
    const std::vector<Eigen::VectorXd> vertices = {
        Eigen::Vector2d(0.0, 1.0),
        Eigen::Vector2d(1.0, 0.0),
        Eigen::Vector2d(-1.0, 0.0),
    };
    return {vertices.begin(), vertices.begin() + count};
  }

  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> endmembers;
  endmembers.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(endmembers.size()) < count) {
    bool placed = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      Eigen::VectorXd candidate = random_smooth_curve(d, rng);
      const bool separated =
          std::all_of(endmembers.begin(), endmembers.end(),
                      [&](const Eigen::VectorXd& e) {
                        return angle_deg(candidate, e) >= kMinPairwiseAngleDeg;
                      });
      if (separated) {
        endmembers.push_back(std::move(candidate));
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw AlgorithmError(
          "make_endmembers: could not satisfy the 15-degree pairwise angle "
          "separation in 100 attempts");
    }
  }
  return endmembers;
}

void SyntheticConfig::validate() const {
  std::vector<std::string> violations;
  if (endmembers.size() < 2) {
    violations.push_back("endmembers: need the target plus >= 1 background");
  } else {
    const Eigen::Index d = endmembers.front().size();
    for (const auto& e : endmembers) {
      if (e.size() != d) {
        violations.push_back("endmembers: dimensions disagree");
        break;
      }
    }
  }
  if (n_pos_bags < 1) violations.push_back("n_pos_bags: must be >= 1");
  if (n_neg_bags < 1) violations.push_back("n_neg_bags: must be >= 1");
  if (instances_per_bag < 1) {
    violations.push_back("instances_per_bag: must be >= 1");
  }
  if (targets_per_positive_bag < 1) {
    violations.push_back("targets_per_positive_bag: must be >= 1");
  }
  if (targets_per_positive_bag > instances_per_bag) {
    violations.push_back(
        "targets_per_positive_bag: exceeds instances_per_bag");
  }
  if (!(mean_target_proportion > 0.0 && mean_target_proportion < 1.0)) {
    violations.push_back("mean_target_proportion: must lie in (0, 1)");
  }
  if (!(proportion_concentration > 0.0)) {
    violations.push_back("proportion_concentration: must be > 0");
  }
  if (std::isnan(snr_db)) violations.push_back("snr_db: must not be NaN");
  if (!background_mask.empty()) {
    if (endmembers.size() >= 2 &&
        background_mask.size() != endmembers.size() - 1) {
      violations.push_back(
          "background_mask: size must equal the background endmember count");
    }
    if (std::none_of(background_mask.begin(), background_mask.end(),
                     [](std::uint8_t b) { return b != 0; })) {
      violations.push_back("background_mask: must allow >= 1 endmember");
    }
  }
  if (!violations.empty()) {
    std::string msg = "invalid synthetic config:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
}

SyntheticDataset generate(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const Mixer mixer = make_mixer(config);

  SyntheticDataset data;
  data.true_signature = config.endmembers.front();

  std::vector<Instance> instances;
  std::vector<Bag> bags;
  auto emit_bag = [&](const std::string& id, bool positive, int n_targets) {
    Bag bag;
    bag.id = id;
    bag.positive = positive;
    for (int i = 0; i < config.instances_per_bag; ++i) {
      Eigen::VectorXd proportions;
      const bool is_target = i < n_targets;
      double alpha = 0.0;
      Eigen::VectorXd x;
      if (is_target) {
        alpha = beta_draw(config.mean_target_proportion,
                          config.proportion_concentration, rng);
        x = mixer.target_instance(alpha, rng, proportions);
      } else {
        x = mixer.background_instance(rng, proportions);
      }
      data.truth.push_back({id, alpha, is_target});
      data.proportions.push_back(std::move(proportions));
      bag.instances.push_back(x);
      instances.push_back(std::move(x));
    }
    bags.push_back(std::move(bag));
  };

  for (int j = 1; j <= config.n_pos_bags; ++j) {
    emit_bag(padded_id("pos", j), true, config.targets_per_positive_bag);
  }
  for (int j = 1; j <= config.n_neg_bags; ++j) {
    emit_bag(padded_id("neg", j), false, 0);
  }

  add_noise(instances, config.snr_db, rng);

  // Copy the noisy instances back into bag order.
  std::size_t cursor = 0;
  for (auto& bag : bags) {
    for (auto& x : bag.instances) x = instances[cursor++];
    data.bags.add_bag(std::move(bag));
  }
  return data;
}

InstancePool generate_instance_pool(
    const std::vector<Eigen::VectorXd>& endmembers, int n_pos, int n_neg,
    double mean_target_proportion, double proportion_concentration,
    double snr_db, const std::vector<std::uint8_t>& background_mask,
    std::uint64_t seed) {
  SyntheticConfig probe;  // reuse the field validation
  probe.endmembers = endmembers;
  probe.mean_target_proportion = mean_target_proportion;
  probe.proportion_concentration = proportion_concentration;
  probe.snr_db = snr_db;
  probe.background_mask = background_mask;
  probe.validate();
  if (n_pos < 1 || n_neg < 1) {
    throw ConfigError("instance pool needs n_pos >= 1 and n_neg >= 1");
  }

  std::mt19937_64 rng(seed);
  const Mixer mixer = make_mixer(probe);

  InstancePool pool;
  Eigen::VectorXd proportions;
  for (int i = 0; i < n_pos; ++i) {
    const double alpha =
        beta_draw(mean_target_proportion, proportion_concentration, rng);
    pool.instances.push_back(mixer.target_instance(alpha, rng, proportions));
    pool.labels.push_back(1);
    pool.alphas.push_back(alpha);
  }
  for (int i = 0; i < n_neg; ++i) {
    pool.instances.push_back(mixer.background_instance(rng, proportions));
    pool.labels.push_back(0);
    pool.alphas.push_back(0.0);
  }
  add_noise(pool.instances, snr_db, rng);
  return pool;
}

}  // namespace miace
