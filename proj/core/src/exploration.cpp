#include "milo/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "milo/error.hpp"

namespace milo {

std::vector<double> taylor_softmax(std::span<const double> gains) {
  if (gains.empty()) throw Error(ErrorCode::kEmptyInput, "taylor_softmax of an empty gain vector");
  std::vector<double> p(gains.size());
  double total = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    const double g = gains[i];
    if (!std::isfinite(g)) {
      throw Error(ErrorCode::kNonFiniteGain, "gain " + std::to_string(i) + " is not finite");
    }
    p[i] = 1.0 + g + 0.5 * g * g;
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<LocalIndex> weighted_sample_without_replacement(std::span<const double> p,
                                                            std::size_t k, RngStream& rng) {
  if (k > p.size()) {
    throw Error(ErrorCode::kBudgetTooLarge, "cannot draw " + std::to_string(k) + " of " +
                                                std::to_string(p.size()) + " items");
  }
  std::vector<std::pair<double, LocalIndex>> keys(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
      throw Error(ErrorCode::kInvalidDistribution,
                  "weight " + std::to_string(i) + " is negative or non-finite");
    }
    // One uniform per item, drawn in index order, so the stream position never
    // depends on k.
    const double u = rng.uniform_open01();
    const double key =
        p[i] > 0.0 ? -std::log(u) / p[i] : std::numeric_limits<double>::infinity();
    keys[i] = {key, i};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end());
  std::vector<LocalIndex> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keys[i].second;
  return out;
}

std::vector<Subset> sge_class_subsets(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                                      ClassId class_id, std::size_t budget, std::size_t n,
                                      double epsilon, std::uint64_t seed) {
  std::vector<Subset> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, stream_id(StreamDomain::kStochasticGreedy, i, class_id));
    const GreedyResult r = stochastic_greedy(kind, kernel, budget, epsilon, rng);
    out[i].reserve(budget);
    for (LocalIndex e : r.selected) out[i].push_back(kernel.indices()[e]);
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

namespace {

void check_kernels(const ClassPartition& partition, std::span<const SimilarityKernel> kernels) {
  if (kernels.size() != partition.num_classes()) {
    throw Error(ErrorCode::kInvalidConfig, std::to_string(kernels.size()) + " kernels for " +
                                               std::to_string(partition.num_classes()) +
                                               " classes");
  }
  for (std::size_t c = 0; c < kernels.size(); ++c) {
    if (!std::ranges::equal(kernels[c].indices(), partition.members[c])) {
      throw Error(ErrorCode::kInvalidConfig,
                  "kernel " + std::to_string(c) + " does not cover class " + std::to_string(c));
    }
  }
}

}  // namespace

SubsetFamily sge_family(const SetFunctionKind& kind, const ClassPartition& partition,
                        std::span<const SimilarityKernel> kernels, std::size_t n,
                        double epsilon, std::uint64_t seed) {
  check_kernels(partition, kernels);
  SubsetFamily family{std::vector<Subset>(n), epsilon, seed};
  for (std::size_t c = 0; c < kernels.size(); ++c) {
    const auto per_class = sge_class_subsets(kind, kernels[c], static_cast<ClassId>(c),
                                             partition.budgets[c], n, epsilon, seed);
    for (std::size_t i = 0; i < n; ++i) {
      family.subsets[i].insert(family.subsets[i].end(), per_class[i].begin(), per_class[i].end());
    }
  }
  for (Subset& s : family.subsets) std::sort(s.begin(), s.end());
  return family;
}

ClassDistribution class_distribution(const SetFunctionKind& kind, const SimilarityKernel& kernel) {
  ClassDistribution d;
  d.indices.assign(kernel.indices().begin(), kernel.indices().end());
  d.gains = greedy_sample_importance(kind, kernel);
  d.probabilities = taylor_softmax(d.gains);
  return d;
}

SamplingDistribution build_sampling_distribution(const SetFunctionKind& kind,
                                                 const ClassPartition& partition,
                                                 std::span<const SimilarityKernel> kernels) {
  check_kernels(partition, kernels);
  SamplingDistribution dist;
  dist.classes.reserve(kernels.size());
  for (const SimilarityKernel& k : kernels) dist.classes.push_back(class_distribution(kind, k));
  return dist;
}

Subset sample_wre_subset(const SamplingDistribution& dist, std::span<const std::size_t> budgets,
                         std::uint64_t seed, std::uint64_t phase) {
  if (budgets.size() != dist.classes.size()) {
    throw Error(ErrorCode::kInvalidConfig, "budget count does not match class count");
  }
  Subset out;
  for (std::size_t c = 0; c < dist.classes.size(); ++c) {
    RngStream rng(seed, stream_id(StreamDomain::kWeightedExploration, phase, c));
    const auto local =
        weighted_sample_without_replacement(dist.classes[c].probabilities, budgets[c], rng);
    for (LocalIndex e : local) out.push_back(dist.classes[c].indices[e]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace milo
