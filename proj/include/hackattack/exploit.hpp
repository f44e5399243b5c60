#pragma once

#include <cmath>
#include <compare>
#include <set>
#include <span>
#include <vector>

#include "hackattack/config.hpp"
#include "hackattack/rng.hpp"

namespace hackattack {

// An attack capability, and equally the identity of the patch that blocks it.
struct Exploit {
  int os = 0;
  int power = 0;

  bool operator==(const Exploit&) const = default;
  // Strongest first: power descending, then OS ascending.
  std::strong_ordering operator<=>(const Exploit& o) const {
    if (power != o.power) return o.power <=> power;
    return os <=> o.os;
  }
};

using ExploitSet = std::set<Exploit>;

inline int exploit_index(const GameConfig& c, Exploit e) { return e.power * c.num_os + e.os; }

inline Exploit exploit_at(const GameConfig& c, int index) {
  return Exploit{index % c.num_os, index / c.num_os};
}

inline bool valid_exploit(const GameConfig& c, Exploit e) {
  return e.os >= 0 && e.os < c.num_os && e.power >= 0 && e.power <= c.max_power;
}

// P(power = n) = 2^-(n+1) / (1 - 2^-(max_power+1)).
inline double power_probability(const GameConfig& c, int power) {
  const double norm = 1.0 - std::ldexp(1.0, -(c.max_power + 1));
  return std::ldexp(1.0, -(power + 1)) / norm;
}

inline double exploit_probability(const GameConfig& c, Exploit e) {
  return power_probability(c, e.power) / c.num_os;
}

inline int sample_power(const GameConfig& c, Rng& rng) {
  const double u = rng.uniform01();
  double cdf = 0.0;
  for (int n = 0; n < c.max_power; ++n) {
    cdf += power_probability(c, n);
    if (u < cdf) return n;
  }
  return c.max_power;
}

inline Exploit sample_exploit(const GameConfig& c, Rng& rng) {
  const int os = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(c.num_os)));
  return Exploit{os, sample_power(c, rng)};
}

// Draws `count` distinct exploits, re-drawing duplicates.
inline ExploitSet sample_distinct_exploits(const GameConfig& c, Rng& rng, int count) {
  ExploitSet out;
  while (static_cast<int>(out.size()) < count) out.insert(sample_exploit(c, rng));
  return out;
}

// Items of equal weight grouped together. Drawing without replacement in
// proportion to weight is what "re-draw on duplicate" amounts to.
struct WeightClass {
  double weight = 0.0;  // per item
  int items = 0;
};

namespace detail {

inline double inclusion_rec(std::span<const WeightClass> classes, std::vector<int>& taken,
                            double mass, int draws, int targets_left,
                            std::span<const int> target_classes) {
  if (targets_left == 0) return 1.0;
  if (draws == 0 || mass <= 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < classes.size(); ++j) {
    const int avail = classes[j].items - taken[j];
    if (avail <= 0 || classes[j].weight <= 0.0) continue;
    const double p = avail * classes[j].weight / mass;
    bool is_target = false;
    for (int t : target_classes) is_target |= (static_cast<std::size_t>(t) == j);
    ++taken[j];
    total += p * inclusion_rec(classes, taken, mass - classes[j].weight, draws - 1,
                               targets_left - (is_target ? 1 : 0), target_classes);
    --taken[j];
  }
  return total;
}

}  // namespace detail

// Probability that every class in `target_classes` (each a single item) is
// among `draws` distinct weighted draws.
inline double inclusion_probability(std::span<const WeightClass> classes, int draws,
                                    std::span<const int> target_classes) {
  double mass = 0.0;
  for (const auto& k : classes) mass += k.weight * k.items;
  std::vector<int> taken(classes.size(), 0);
  return detail::inclusion_rec(classes, taken, mass, draws,
                               static_cast<int>(target_classes.size()), target_classes);
}

// Patch-space classes with the given powers singled out as targets. Returns
// the classes and the target class indices.
inline std::pair<std::vector<WeightClass>, std::vector<int>> patch_space_classes(
    const GameConfig& c, std::span<const int> target_powers) {
  const int per_power = c.patch_model == PatchModel::AnyOs ? c.num_os : 1;
  const double scale = c.patch_model == PatchModel::AnyOs ? 1.0 / c.num_os : 1.0;
  std::vector<WeightClass> classes;
  for (int n = 0; n < c.num_powers(); ++n) {
    int items = per_power;
    for (int t : target_powers) items -= (t == n);
    classes.push_back({power_probability(c, n) * scale, items});
  }
  std::vector<int> targets;
  for (int t : target_powers) {
    targets.push_back(static_cast<int>(classes.size()));
    classes.push_back({power_probability(c, t) * scale, 1});
  }
  return {classes, targets};
}

}  // namespace hackattack
