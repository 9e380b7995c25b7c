#pragma once

// Annotation suggestion: filter the unannotated pool to the K most uncertain
// images, then greedily pick k of them to maximize representativeness
//
//   f(A, x) = max_{i in A} sim(i, x)        (0 when A is empty)
//   F(A, U) = sum_{x in U} f(A, x)
//
// F is monotone submodular (a facility-location objective; with 0/1
// similarities it is exactly max k-cover), so the greedy choice is within a
// factor 1 - 1/e of the best k-subset of the candidates. brute_force_select
// enumerates all k-subsets and serves as the exact reference.
//
// Image ids are row/column indices of the similarity matrix. The only
// tie-break policy is lowest-id: whenever two ids compare equal on value,
// the smaller id wins. Value comparisons are exact (no epsilon).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "suggestive/descriptor.hpp"
#include "suggestive/error.hpp"
#include "suggestive/numeric.hpp"

namespace suggestive {

enum class TieBreak { kLowestId };

inline constexpr std::uint64_t kDefaultEnumerationCap = 2'000'000;

struct SuggestionConfig {
  Index k = 8;   // images suggested per stage
  Index K = 16;  // uncertainty candidate pool size
  TieBreak tie_break = TieBreak::kLowestId;

  void validate() const {
    if (k < 1 || K < k) {
      throw ValidationError("suggestion config requires 1 <= k <= K, got k=" +
                            std::to_string(k) + " K=" + std::to_string(K));
    }
  }
};

// The unannotated set S_u with per-image uncertainty scores and the
// similarity matrix. `uncertainty` and `sim` are indexed by global image id
// and may cover annotated images too; only ids in `unannotated` are used.
template <typename Scalar>
struct Pool {
  std::vector<Index> unannotated;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> uncertainty;
  SimilarityMatrix<Scalar> sim;

  // `unannotated` must be strictly increasing.
  void validate() const {
    if (sim.rows() != sim.cols()) throw ValidationError("pool similarity matrix is not square");
    if (uncertainty.size() != sim.rows()) {
      throw ValidationError("pool uncertainty vector length " +
                            std::to_string(uncertainty.size()) + " != similarity size " +
                            std::to_string(sim.rows()));
    }
    for (std::size_t i = 0; i < unannotated.size(); ++i) {
      const Index id = unannotated[i];
      if (id < 0 || id >= sim.rows()) {
        throw ValidationError("pool id " + std::to_string(id) + " has no similarity row");
      }
      if (i > 0 && unannotated[i - 1] >= id) {
        throw ValidationError("pool ids must be strictly increasing");
      }
    }
  }
};

template <typename Scalar>
struct Suggestion {
  std::vector<Index> selected;        // in selection order
  Scalar objective = 0;               // F(selected, S_u)
  std::vector<Scalar> marginal_gains;  // gain of each pick, same order
};

// Ids of the min(K, |S_u|) most uncertain images, by descending score and
// then ascending id.
template <typename Scalar>
std::vector<Index> top_k_uncertain(const Pool<Scalar>& pool, Index K) {
  pool.validate();
  std::vector<Index> ids = pool.unannotated;
  const auto take = static_cast<std::size_t>(std::clamp<Index>(K, 0, ids.size()));
  std::partial_sort(ids.begin(), ids.begin() + take, ids.end(), [&](Index a, Index b) {
    const Scalar ua = pool.uncertainty(a);
    const Scalar ub = pool.uncertainty(b);
    if (ua != ub) return ua > ub;
    return a < b;
  });
  ids.resize(take);
  return ids;
}

// f(A, x): best similarity of x to any member of A; 0 for empty A.
template <typename Derived>
typename Derived::Scalar representativeness_one(std::span<const Index> chosen, Index x,
                                                const Eigen::MatrixBase<Derived>& sim) {
  using Scalar = typename Derived::Scalar;
  Scalar best = 0;
  for (const Index i : chosen) best = std::max(best, sim(i, x));
  return best;
}

// F(A, U) = sum over x in U of f(A, x), summed in the order of U.
template <typename Derived>
typename Derived::Scalar representativeness(std::span<const Index> chosen,
                                            std::span<const Index> members,
                                            const Eigen::MatrixBase<Derived>& sim) {
  CompensatedSum<typename Derived::Scalar> sum;
  for (const Index x : members) sum += representativeness_one(chosen, x, sim);
  return sum.value();
}

namespace detail {

// Marginal gain of adding `candidate` given f_best[j] = f(A, members[j]).
template <typename Scalar>
Scalar marginal_gain(const SimilarityMatrix<Scalar>& sim, Index candidate,
                     std::span<const Index> members, std::span<const Scalar> best) {
  CompensatedSum<Scalar> sum;
  for (std::size_t j = 0; j < members.size(); ++j) {
    const Scalar d = sim(candidate, members[j]) - best[j];
    if (d > 0) sum += d;
  }
  return sum.value();
}

template <typename Scalar>
Suggestion<Scalar> finish(const Pool<Scalar>& pool, std::vector<Index> order) {
  Suggestion<Scalar> out;
  std::vector<Scalar> best(pool.unannotated.size(), Scalar(0));
  for (const Index id : order) {
    out.marginal_gains.push_back(
        marginal_gain<Scalar>(pool.sim, id, pool.unannotated, best));
    for (std::size_t j = 0; j < best.size(); ++j) {
      best[j] = std::max(best[j], pool.sim(id, pool.unannotated[j]));
    }
  }
  out.selected = std::move(order);
  out.objective = representativeness<SimilarityMatrix<Scalar>>(out.selected, pool.unannotated,
                                                              pool.sim);
  return out;
}

}  // namespace detail

// Greedy representativeness maximization over the top-K uncertain
// candidates. Keeps f_best[x] = f(S_a, x) for every x in S_u, so each step
// costs O(|S_c| * |S_u|). Candidate gains within a step may be evaluated in
// parallel; the argmax is then taken sequentially in ascending id order with
// a strict comparison, which yields the lowest id among equal gains.
template <typename Scalar>
Suggestion<Scalar> greedy_select(const Pool<Scalar>& pool, const SuggestionConfig& cfg) {
  cfg.validate();
  pool.validate();
  if (pool.unannotated.empty()) throw ValidationError("greedy_select on an empty pool");

  std::vector<Index> candidates = top_k_uncertain(pool, cfg.K);
  std::sort(candidates.begin(), candidates.end());
  const std::span<const Index> members(pool.unannotated);
  const std::size_t picks = std::min<std::size_t>(cfg.k, candidates.size());

  std::vector<Scalar> best(members.size(), Scalar(0));
  std::vector<char> taken(candidates.size(), 0);
  std::vector<Scalar> gains(candidates.size(), Scalar(0));
  std::vector<Index> order;
  order.reserve(picks);

  const std::size_t work = candidates.size() * members.size();
  for (std::size_t step = 0; step < picks; ++step) {
    auto evaluate = [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        if (!taken[c]) {
          gains[c] = detail::marginal_gain<Scalar>(pool.sim, candidates[c], members, best);
        }
      }
    };
    if (work >= (std::size_t{1} << 16)) {
      parallel_for(candidates.size(), evaluate, 4);
    } else {
      evaluate(0, candidates.size());
    }

    std::size_t arg = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (taken[c]) continue;
      if (arg == candidates.size() || gains[c] > gains[arg]) arg = c;
    }
    taken[arg] = 1;
    const Index chosen = candidates[arg];
    order.push_back(chosen);
    for (std::size_t j = 0; j < members.size(); ++j) {
      best[j] = std::max(best[j], pool.sim(chosen, members[j]));
    }
  }
  return detail::finish(pool, std::move(order));
}

// C(n, k), saturating at the maximum uint64.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // r * num / i is exact at every step; guard the multiplication.
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t rr = r / g;
    const std::uint64_t ii = i / g;
    const std::uint64_t nn = num / ii;
    if (rr > std::numeric_limits<std::uint64_t>::max() / nn) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r = rr * nn;
  }
  return r;
}

// Exhaustive maximization of F over every min(k, |S_c|)-subset of the top-K
// candidates. Subsets are visited in lexicographic order of ascending ids and
// only a strictly larger F replaces the incumbent, so ties resolve to the
// lexicographically smallest subset. Selected ids come back ascending, with
// marginal gains measured along that order.
template <typename Scalar>
Suggestion<Scalar> brute_force_select(const Pool<Scalar>& pool, const SuggestionConfig& cfg,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
  cfg.validate();
  pool.validate();
  if (pool.unannotated.empty()) throw ValidationError("brute_force_select on an empty pool");

  std::vector<Index> candidates = top_k_uncertain(pool, cfg.K);
  std::sort(candidates.begin(), candidates.end());
  const std::size_t n = candidates.size();
  const std::size_t k = std::min<std::size_t>(cfg.k, n);
  const std::uint64_t count = binomial(n, k);
  if (count > cap) {
    throw ValidationError("exhaustive search over C(" + std::to_string(n) + ", " +
                          std::to_string(k) + ") = " + std::to_string(count) +
                          " subsets exceeds the enumeration cap of " + std::to_string(cap) +
                          "; use greedy selection only");
  }

  const std::span<const Index> members(pool.unannotated);
  std::vector<std::size_t> pos(k);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::vector<Index> subset(k);
  std::vector<Index> best_subset;
  Scalar best_value = -1;
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = candidates[pos[i]];
    const Scalar value = representativeness<SimilarityMatrix<Scalar>>(subset, members, pool.sim);
    if (value > best_value) {
      best_value = value;
      best_subset = subset;
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && pos[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++pos[i - 1];
    for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
  }
  return detail::finish(pool, std::move(best_subset));
}

}  // namespace suggestive
