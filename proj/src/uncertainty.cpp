#include "suggestive/uncertainty.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "suggestive/rng.hpp"

namespace suggestive {

BootstrapPlan bootstrap_plan(std::uint32_t n_models, std::uint32_t n_train, std::uint64_t seed) {
  if (n_models < 2) {
    throw ValidationError("bootstrap_plan needs at least 2 models, got " +
                          std::to_string(n_models));
  }
  if (n_train < 1) throw ValidationError("bootstrap_plan needs at least 1 training item");

  BootstrapPlan plan{n_models, n_train, seed, {}};
  plan.index_sets.resize(n_models);
  SplitMix64 rng(seed);
  for (auto& set : plan.index_sets) {
    set.resize(n_train);
    for (auto& idx : set) idx = static_cast<std::uint32_t>(rng.uniform_below(n_train));
  }
  return plan;
}

void write_bootstrap_plan(std::ostream& os, const BootstrapPlan& plan) {
  os << "bootstrap " << plan.n_models << ' ' << plan.n_train << ' ' << plan.seed << '\n';
  for (const auto& set : plan.index_sets) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i) os << ' ';
      os << set[i];
    }
    os << '\n';
  }
}

BootstrapPlan read_bootstrap_plan(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("bootstrap plan: missing header line");
  std::istringstream header(line);
  std::string tag;
  BootstrapPlan plan;
  if (!(header >> tag >> plan.n_models >> plan.n_train >> plan.seed) || tag != "bootstrap") {
    throw ValidationError("bootstrap plan: malformed header '" + line + "'");
  }
  for (std::uint32_t m = 0; m < plan.n_models; ++m) {
    if (!std::getline(is, line)) {
      throw ValidationError("bootstrap plan: missing line for model " + std::to_string(m));
    }
    std::istringstream row(line);
    std::vector<std::uint32_t> set;
    std::uint32_t idx = 0;
    while (row >> idx) {
      if (idx >= plan.n_train) {
        throw ValidationError("bootstrap plan: index " + std::to_string(idx) +
                              " out of range on model " + std::to_string(m));
      }
      set.push_back(idx);
    }
    if (set.size() != plan.n_train) {
      throw ValidationError("bootstrap plan: model " + std::to_string(m) + " has " +
                            std::to_string(set.size()) + " indices, expected " +
                            std::to_string(plan.n_train));
    }
    plan.index_sets.push_back(std::move(set));
  }
  return plan;
}

}  // namespace suggestive
