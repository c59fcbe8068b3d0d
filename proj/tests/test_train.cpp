#include <doctest.h>

#include <random>

#include "miace/eval.hpp"
#include "miace/train.hpp"
#include "test_util.hpp"

using namespace miace;
using namespace miace::testutil;

namespace {

// Random bag set with continuous features; negative stats are nonsingular
// almost surely.
BagSet random_bagset(std::mt19937_64& rng, int n_pos, int n_neg,
                     Eigen::Index d) {
  std::uniform_int_distribution<int> bag_size(2, 6);
  std::vector<Bag> bags;
  for (int j = 0; j < n_pos; ++j) {
    Bag bag{"p" + std::to_string(j), true, {}};
    const int n = bag_size(rng);
    for (int i = 0; i < n; ++i) bag.instances.push_back(random_vector(rng, d));
    bags.push_back(std::move(bag));
  }
  for (int j = 0; j < n_neg; ++j) {
    Bag bag{"n" + std::to_string(j), false, {}};
    const int n = std::max(bag_size(rng), 4);
    for (int i = 0; i < n; ++i) bag.instances.push_back(random_vector(rng, d));
    bags.push_back(std::move(bag));
  }
  return BagSet(std::move(bags));
}

// Brute-force objective: explicit double loop with a per-bag argmax.
double objective_oracle(const Eigen::VectorXd& s, const PreparedBags& bags) {
  double pos = 0.0;
  for (const auto& bag : bags.positive) {
    double best = -1e300;
    for (Eigen::Index i = 0; i < bag.cols(); ++i) {
      best = std::max(best, s.dot(bag.col(i)));
    }
    pos += best;
  }
  pos /= static_cast<double>(bags.positive.size());
  double neg = 0.0;
  for (const auto& bag : bags.negative) {
    double bag_sum = 0.0;
    for (Eigen::Index i = 0; i < bag.cols(); ++i) {
      bag_sum += s.dot(bag.col(i));
    }
    neg += bag_sum / static_cast<double>(bag.cols());
  }
  neg /= static_cast<double>(bags.negative.size());
  return pos - neg;
}

}  // namespace

TEST_CASE("objective fixed cases") {
  SUBCASE("perfect positive, orthogonal negatives") {
    PreparedBags bags;
    bags.positive.push_back(Eigen::Vector2d(1, 0));
    Eigen::MatrixXd neg(2, 2);
    neg.col(0) = Eigen::Vector2d(0, 1);
    neg.col(1) = Eigen::Vector2d(0, -1);
    bags.negative.push_back(neg);
    bags.negative_term = Eigen::Vector2d(0, 0);
    CHECK(objective(Eigen::Vector2d(1, 0), bags) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("objective negates with the signature") {
    // Single-instance positive bags keep the per-bag max linear in s.
    std::mt19937_64 rng(3);
    PreparedBags bags;
    bags.positive.push_back(Eigen::MatrixXd(random_vector(rng, 3)));
    bags.positive.push_back(Eigen::MatrixXd(random_vector(rng, 3)));
    bags.negative.push_back(Eigen::MatrixXd(random_vector(rng, 3)));
    bags.negative_term = random_vector(rng, 3);
    const Eigen::VectorXd s = random_unit_vector(rng, 3);
    CHECK(objective(s, bags) ==
          doctest::Approx(-objective(-s, bags)).epsilon(1e-12));
  }
}

TEST_CASE("objective matches the double-loop oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto bags = random_bagset(rng, 3, 4, 3);
    const auto stats =
        compute_background_stats(bags, WhitenScope::NegativeOnly);
    for (const Mode mode : {Mode::Smf, Mode::Ace}) {
      const auto prepared = prepare_bags(bags, stats, mode);
      const Eigen::VectorXd s = random_unit_vector(rng, 3);
      CHECK(objective(s, prepared) ==
            doctest::Approx(objective_oracle(s, prepared)).epsilon(1e-12));
    }
  }
}

TEST_CASE("select_instances picks the per-bag argmax") {
  SUBCASE("plain argmax and tie break") {
    PreparedBags bags;
    Eigen::MatrixXd bag(2, 3);
    bag.col(0) = Eigen::Vector2d(0.1, 0);
    bag.col(1) = Eigen::Vector2d(0.9, 0);
    bag.col(2) = Eigen::Vector2d(0.5, 0);
    bags.positive.push_back(bag);
    Eigen::MatrixXd tie(2, 2);
    tie.col(0) = Eigen::Vector2d(0.7, 0);
    tie.col(1) = Eigen::Vector2d(0.7, 0);
    bags.positive.push_back(tie);
    bags.negative_term = Eigen::Vector2d::Zero();

    const auto sel = select_instances(Eigen::Vector2d(1, 0), bags);
    REQUIRE(sel.selected.size() == 2);
    CHECK(sel.selected[0] == 1);
    CHECK(sel.selected[1] == 0);  // tie goes to the lowest index
  }
  SUBCASE("random bags match the exhaustive argmax") {
    std::mt19937_64 rng(9);
    const auto bags = random_bagset(rng, 5, 3, 4);
    const auto stats =
        compute_background_stats(bags, WhitenScope::NegativeOnly);
    const auto prepared = prepare_bags(bags, stats, Mode::Ace);
    const Eigen::VectorXd s = random_unit_vector(rng, 4);
    const auto sel = select_instances(s, prepared);
    for (std::size_t j = 0; j < prepared.positive.size(); ++j) {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < prepared.positive[j].cols(); ++i) {
        if (s.dot(prepared.positive[j].col(i)) >
            s.dot(prepared.positive[j].col(best))) {
          best = i;
        }
      }
      CHECK(sel.selected[j] == best);
    }
  }
}

TEST_CASE("update_signature closed form") {
  SUBCASE("single selected vector with a zero negative term") {
    PreparedBags bags;
    bags.positive.push_back(Eigen::Vector2d(1, 0));
    bags.negative_term = Eigen::Vector2d::Zero();
    const auto s = update_signature({{0}}, bags);
    CHECK(s.isApprox(Eigen::Vector2d(1, 0), 1e-15));
  }
  SUBCASE("cancelling positives degenerate") {
    PreparedBags bags;
    bags.positive.push_back(Eigen::Vector2d(1, 0));
    bags.positive.push_back(Eigen::Vector2d(-1, 0));
    bags.negative_term = Eigen::Vector2d::Zero();
    CHECK_THROWS_AS(update_signature({{0, 0}}, bags), DegenerateUpdateError);
  }
  SUBCASE("closed form dominates random unit vectors") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      const auto bags = random_bagset(rng, 4, 3, 3);
      const auto stats =
          compute_background_stats(bags, WhitenScope::NegativeOnly);
      const auto prepared = prepare_bags(bags, stats, Mode::Ace);

      SelectionState sel;
      for (const auto& bag : prepared.positive) {
        std::uniform_int_distribution<Eigen::Index> pick(0, bag.cols() - 1);
        sel.selected.push_back(pick(rng));
      }
      const Eigen::VectorXd best = update_signature(sel, prepared);
      const double best_value = objective(best, prepared, sel);
      for (int probe = 0; probe < 2000; ++probe) {
        const Eigen::VectorXd v = random_unit_vector(rng, 3);
        CHECK(best_value >= objective(v, prepared, sel) - 1e-12);
      }
    }
  }
}

TEST_CASE("initialize_signature evaluates all positive candidates") {
  SUBCASE("single candidate wins by default") {
    PreparedBags bags;
    bags.positive.push_back(Eigen::Vector2d(0, 2));
    bags.negative_term = Eigen::Vector2d::Zero();
    CHECK(initialize_signature(bags).isApprox(Eigen::Vector2d(0, 1), 1e-15));
  }
  SUBCASE("candidate along the negative mean loses") {
    PreparedBags bags;
    Eigen::MatrixXd pos(2, 2);
    pos.col(0) = Eigen::Vector2d(1, 0);   // the negative mean direction
    pos.col(1) = Eigen::Vector2d(0, 1);
    bags.positive.push_back(pos);
    bags.negative_term = Eigen::Vector2d(1, 0);
    CHECK(initialize_signature(bags).isApprox(Eigen::Vector2d(0, 1), 1e-15));
  }
  SUBCASE("random bags match exhaustive evaluation") {
    std::mt19937_64 rng(17);
    const auto bags = random_bagset(rng, 4, 4, 3);
    const auto stats =
        compute_background_stats(bags, WhitenScope::NegativeOnly);
    const auto prepared = prepare_bags(bags, stats, Mode::Smf);

    const Eigen::VectorXd init = initialize_signature(prepared);
    double best = -1e300;
    for (const auto& bag : prepared.positive) {
      for (Eigen::Index i = 0; i < bag.cols(); ++i) {
        best = std::max(best, objective(bag.col(i).normalized(), prepared));
      }
    }
    CHECK(objective(init, prepared) == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("all candidates at the mean is an error") {
    PreparedBags bags;
    bags.positive.push_back(Eigen::Vector2d(0, 0));
    bags.negative_term = Eigen::Vector2d::Zero();
    CHECK_THROWS_AS(initialize_signature(bags), AlgorithmError);
  }
}

TEST_CASE("train fixed point on a single positive instance") {
  Bag neg{"n",
          false,
          {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0), Eigen::Vector2d(0, 1),
           Eigen::Vector2d(0, -1)}};
  Bag pos{"p", true, {Eigen::Vector2d(2, 3)}};
  BagSet bags({pos, neg});

  TrainConfig config;
  config.mode = Mode::Ace;
  config.epsilon = 0.0;
  const auto result = train(bags, config);

  CHECK(result.converged);
  CHECK(result.iterations == 1);
  const auto stats = compute_background_stats(bags, WhitenScope::NegativeOnly, 0.0);
  const auto w = whiten(Eigen::Vector2d(2, 3), stats, true);
  CHECK(result.signature.signature.isApprox(
      unwhiten_signature(*w.normalized, stats), 1e-12));
}

TEST_CASE("train separates noiseless synthetic data perfectly") {
  // Pure target instances against mixtures of two background materials.
  std::mt19937_64 rng(19);
  const Eigen::Vector3d target(0, 0, 1);
  const Eigen::Vector3d bg1(1, 0.1, 0);
  const Eigen::Vector3d bg2(0.1, 1, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto background = [&] {
    // In-plane mixture with a little spread; never touches the target axis.
    const double p = unif(rng);
    Eigen::Vector3d x = p * bg1 + (1 - p) * bg2;
    x[0] += 0.05 * (unif(rng) - 0.5);
    x[1] += 0.05 * (unif(rng) - 0.5);
    return x;
  };

  std::vector<Bag> raw;
  std::vector<int> labels;
  for (int j = 0; j < 4; ++j) {
    Bag bag{"p" + std::to_string(j), true, {}};
    bag.instances.push_back(target);
    labels.push_back(1);
    for (int i = 0; i < 4; ++i) {
      bag.instances.push_back(background());
      labels.push_back(0);
    }
    raw.push_back(std::move(bag));
  }
  for (int j = 0; j < 4; ++j) {
    Bag bag{"n" + std::to_string(j), false, {}};
    for (int i = 0; i < 5; ++i) {
      bag.instances.push_back(background());
      labels.push_back(0);
    }
    raw.push_back(std::move(bag));
  }
  BagSet bags(std::move(raw));

  TrainConfig config;
  config.mode = Mode::Ace;
  const auto result = train(bags, config);
  CHECK(result.converged);

  const auto scores = score_dataset(bags.all_instances(), result.signature);
  CHECK(auc(roc_curve(scores.scores, labels)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("train is deterministic") {
  std::mt19937_64 rng(29);
  const auto bags = random_bagset(rng, 4, 4, 3);
  TrainConfig config;
  config.mode = Mode::Smf;
  const auto a = train(bags, config);
  const auto b = train(bags, config);
  CHECK(a.signature.signature == b.signature.signature);
  CHECK(a.signature.whitened == b.signature.whitened);
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective == b.objective);
}

TEST_CASE("training objective is monotone and terminates") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto bags = random_bagset(rng, 3, 3, 3);
    TrainConfig config;
    config.mode = trial % 2 == 0 ? Mode::Ace : Mode::Smf;
    config.keep_trace = true;
    const auto result = train(bags, config);

    CHECK(result.iterations <= config.max_iterations);
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
      CHECK(result.trace[i].objective >=
            result.trace[i - 1].objective - 1e-10);
    }
    CHECK(result.signature.whitened.norm() ==
          doctest::Approx(1.0).epsilon(1e-9));

    // Recomputing the objective at the returned signature reproduces it.
    const auto stats = compute_background_stats(bags, config.scope);
    const auto prepared = prepare_bags(bags, stats, config.mode);
    CHECK(objective(result.signature.whitened, prepared) ==
          doctest::Approx(result.objective).epsilon(1e-10));

    if (result.converged) {
      // The final selection is a fixed point of selection.
      const auto sel = select_instances(result.signature.whitened, prepared);
      const auto s_next = update_signature(sel, prepared);
      CHECK((s_next - result.signature.whitened).norm() <= 1e-12);
    }
  }
}

TEST_CASE("linear discriminant variant") {
  SUBCASE("separable clouds along axis 0") {
    std::mt19937_64 rng(37);
    std::vector<Bag> raw;
    for (int j = 0; j < 6; ++j) {
      Bag bag{"b" + std::to_string(j), j % 2 == 0, {}};
      const double shift = j % 2 == 0 ? 4.0 : -4.0;
      Eigen::VectorXd x = random_vector(rng, 3, -0.5, 0.5);
      x[0] += shift;
      bag.instances.push_back(x);
      raw.push_back(std::move(bag));
    }
    BagSet bags(std::move(raw));

    TrainConfig config;
    config.mode = Mode::LinearDiscriminant;
    const auto result = train(bags, config);
    REQUIRE(result.signature.signature.size() == 4);  // weights + bias
    const Eigen::VectorXd w = result.signature.signature;
    CHECK(std::abs(w[0]) > std::abs(w[1]));
    CHECK(std::abs(w[0]) > std::abs(w[2]));

    // Separable data trains to 100% accuracy at threshold zero.
    const auto scores = score_dataset(bags.all_instances(), result.signature);
    std::size_t i = 0;
    for (const auto& bag : bags.bags()) {
      for (std::size_t k = 0; k < bag.instances.size(); ++k, ++i) {
        CHECK((scores.scores[i] > 0.0) == bag.positive);
      }
    }
  }
  SUBCASE("identical instances degenerate") {
    Bag pos{"p", true, {Eigen::Vector2d(1, 1)}};
    Bag neg{"n", false, {Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)}};
    BagSet bags({pos, neg});
    TrainConfig config;
    config.mode = Mode::LinearDiscriminant;
    CHECK_THROWS_AS(train_linear_discriminant(bags, config),
                    DegenerateUpdateError);
  }
}

TEST_CASE("train validates its inputs") {
  std::mt19937_64 rng(41);
  TrainConfig config;
  SUBCASE("no positive bags") {
    Bag neg{"n", false, random_instances(rng, 5, 2)};
    CHECK_THROWS_AS(train(BagSet({neg}), config), ConfigError);
  }
  SUBCASE("no negative bags") {
    Bag pos{"p", true, random_instances(rng, 5, 2)};
    CHECK_THROWS_AS(train(BagSet({pos}), config), ConfigError);
  }
  SUBCASE("bad max_iterations") {
    config.max_iterations = 0;
    const auto bags = random_bagset(rng, 2, 2, 2);
    CHECK_THROWS_AS(train(bags, config), ConfigError);
  }
}
