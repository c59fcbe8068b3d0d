#include "miace/types.hpp"

#include <cmath>

namespace miace {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Smf:
      return "smf";
    case Mode::Ace:
      return "ace";
    case Mode::LinearDiscriminant:
      return "lindisc";
  }
  throw ConfigError("unknown mode enum value");
}

Mode mode_from_string(const std::string& name) {
  if (name == "smf") return Mode::Smf;
  if (name == "ace") return Mode::Ace;
  if (name == "lindisc") return Mode::LinearDiscriminant;
  throw ConfigError("unknown mode '" + name + "' (expected smf|ace|lindisc)");
}

BagSet::BagSet(std::vector<Bag> bags) {
  for (auto& bag : bags) add_bag(std::move(bag));
}

void BagSet::add_bag(Bag bag) {
  if (bag.instances.empty()) {
    throw ConfigError("bag '" + bag.id + "' has no instances");
  }
  const Eigen::Index d = bag.instances.front().size();
  for (const auto& x : bag.instances) {
    if (x.size() != d) {
      throw ConfigError("bag '" + bag.id + "' mixes instance dimensions");
    }
    require_finite(x, "instance in bag '" + bag.id + "'");
  }
  if (bags_.empty()) {
    dimension_ = d;
  } else if (d != dimension_) {
    throw ConfigError("bag '" + bag.id + "' has dimension " +
                      std::to_string(d) + ", dataset has " +
                      std::to_string(dimension_));
  }
  bags_.push_back(std::move(bag));
}

std::size_t BagSet::n_positive_bags() const {
  std::size_t n = 0;
  for (const auto& b : bags_) n += b.positive ? 1 : 0;
  return n;
}

std::size_t BagSet::n_negative_bags() const {
  return bags_.size() - n_positive_bags();
}

std::size_t BagSet::total_instances() const {
  std::size_t n = 0;
  for (const auto& b : bags_) n += b.instances.size();
  return n;
}

std::vector<Instance> BagSet::all_instances() const {
  std::vector<Instance> out;
  out.reserve(total_instances());
  for (const auto& b : bags_) {
    out.insert(out.end(), b.instances.begin(), b.instances.end());
  }
  return out;
}

std::vector<Instance> BagSet::negative_instances() const {
  std::vector<Instance> out;
  for (const auto& b : bags_) {
    if (!b.positive) {
      out.insert(out.end(), b.instances.begin(), b.instances.end());
    }
  }
  return out;
}

void BagSet::require_both_labels() const {
  if (n_positive_bags() == 0) {
    throw ConfigError("dataset has no positive bags");
  }
  if (n_negative_bags() == 0) {
    throw ConfigError("dataset has no negative bags");
  }
}

void require_finite(const Eigen::VectorXd& v, const std::string& what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ConfigError(what + " has non-finite entry at index " +
                        std::to_string(i));
    }
  }
}

}  // namespace miace
