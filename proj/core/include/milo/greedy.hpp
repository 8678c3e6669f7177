#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "milo/rng.hpp"
#include "milo/set_function.hpp"

namespace milo {

struct GreedyResult {
  std::vector<LocalIndex> selected;  // inclusion order
  std::vector<double> gains;         // gains[t] = marginal gain of selected[t] when committed
  double final_value = 0.0;
};

// Exact greedy: each step commits the argmax marginal gain, smallest index on
// ties. For disparity-min every first-step gain is zero, so the first pick is
// the element with the largest total distance sum_j (1 - s_ej) instead.
// Throws BudgetTooLarge when k > m.
GreedyResult naive_greedy(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                          std::size_t k);

// Candidate pool size for one stochastic-greedy step:
// min(remaining, max(1, ceil((m / k) * ln(1 / epsilon)))).
std::size_t stochastic_pool_size(std::size_t m, std::size_t k, std::size_t remaining,
                                 double epsilon);

// Stochastic greedy ("lazier than lazy"): each step draws a pool uniformly
// without replacement from the unselected elements (partial Fisher-Yates) and
// commits the best pool member. When the pool covers every remaining element no
// random numbers are consumed and the step equals a naive-greedy step.
// Throws BudgetTooLarge, InvalidEpsilon (epsilon outside (0, 1)).
GreedyResult stochastic_greedy(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                               std::size_t k, double epsilon, RngStream& rng);

// Runs naive greedy to exhaustion; result[e] is the gain of e at the step it
// was included.
std::vector<double> greedy_sample_importance(const SetFunctionKind& kind,
                                             const SimilarityKernel& kernel);

struct BruteForceResult {
  std::vector<LocalIndex> subset;  // ascending
  double value = 0.0;
};

inline constexpr std::uint64_t kBruteForceCap = 1'000'000;

// C(n, k), saturating at cap + 1.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap);

// Exhaustive maximizer over all k-subsets in lexicographic order; ties keep the
// lexicographically smallest subset. Throws BudgetTooLarge, InstanceTooLarge
// when C(m, k) > cap.
BruteForceResult brute_force_opt(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                                 std::size_t k, std::uint64_t cap = kBruteForceCap);

}  // namespace milo
