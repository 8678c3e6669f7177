#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "milo/greedy.hpp"
#include "milo/kernel.hpp"
#include "milo/rng.hpp"

namespace milo {

using Subset = std::vector<GlobalIndex>;  // ascending, duplicate-free

// Family of stochastic-greedy subsets, one entry per SGE refresh.
struct SubsetFamily {
  std::vector<Subset> subsets;
  double epsilon = 0.01;
  std::uint64_t seed = 0;

  friend bool operator==(const SubsetFamily&, const SubsetFamily&) = default;
};

struct ClassDistribution {
  std::vector<GlobalIndex> indices;  // aligned with probabilities and gains
  std::vector<double> probabilities;
  std::vector<double> gains;  // greedy importance scores the probabilities came from

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;
};

struct SamplingDistribution {
  std::vector<ClassDistribution> classes;

  friend bool operator==(const SamplingDistribution&, const SamplingDistribution&) = default;
};

// p_i = h(g_i) / sum_j h(g_j) with h(x) = 1 + x + x^2 / 2 (second-order
// Taylor expansion of exp). h >= 1/2 everywhere, so every entry is positive.
// Throws EmptyInput, NonFiniteGain.
std::vector<double> taylor_softmax(std::span<const double> gains);

// Efraimidis-Spirakis sampling without replacement with exponential keys:
// key_i = -ln(u_i) / p_i, return the k smallest keys in ascending key order
// (equal keys by smaller index). Weights need not be normalized.
// Throws BudgetTooLarge, InvalidDistribution (negative or non-finite weight).
std::vector<LocalIndex> weighted_sample_without_replacement(std::span<const double> p,
                                                            std::size_t k, RngStream& rng);

// n stochastic-greedy subsets of one class, mapped to global indices and
// sorted. Subset i of class c draws from stream (kStochasticGreedy, i, c).
std::vector<Subset> sge_class_subsets(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                                      ClassId class_id, std::size_t budget, std::size_t n,
                                      double epsilon, std::uint64_t seed);

// Stochastic-greedy exploration: for each of n subsets, per-class stochastic
// greedy with the partition budgets, unioned and sorted. kernels[c] must be
// the kernel of partition class c.
SubsetFamily sge_family(const SetFunctionKind& kind, const ClassPartition& partition,
                        std::span<const SimilarityKernel> kernels, std::size_t n,
                        double epsilon, std::uint64_t seed);

// Greedy importance gains of one class turned into a Taylor-softmax distribution.
ClassDistribution class_distribution(const SetFunctionKind& kind, const SimilarityKernel& kernel);

SamplingDistribution build_sampling_distribution(const SetFunctionKind& kind,
                                                 const ClassPartition& partition,
                                                 std::span<const SimilarityKernel> kernels);

// Weighted-random-exploration subset for one refresh phase: per class, draw
// budgets[c] samples without replacement from stream (kWeightedExploration,
// phase, c), then union and sort.
Subset sample_wre_subset(const SamplingDistribution& dist, std::span<const std::size_t> budgets,
                         std::uint64_t seed, std::uint64_t phase);

}  // namespace milo
