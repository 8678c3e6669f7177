#include "milo/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>

#include "milo/error.hpp"

namespace milo {

namespace {

void check_budget(std::size_t k, std::size_t m) {
  if (k > m) {
    throw Error(ErrorCode::kBudgetTooLarge, "budget " + std::to_string(k) +
                                                " exceeds ground set of size " + std::to_string(m));
  }
}

struct Pick {
  LocalIndex element;
  double gain;
};

// Best candidate under the greedy rule; ties go to the smallest local index.
Pick pick_best(const GainState& state, std::span<const LocalIndex> candidates) {
  const bool seed_step =
      state.kind().type == SetFunctionType::kDisparityMin && state.selected().empty();
  const SimilarityKernel& k = state.kernel();
  const double m = static_cast<double>(k.size());

  Pick best{std::numeric_limits<LocalIndex>::max(), -std::numeric_limits<double>::infinity()};
  double best_key = -std::numeric_limits<double>::infinity();
  for (LocalIndex e : candidates) {
    const double key = seed_step ? m - k.row_sums()[e] : state.gain_unchecked(e);
    if (key > best_key || (key == best_key && e < best.element)) {
      best_key = key;
      best.element = e;
    }
  }
  best.gain = state.gain_unchecked(best.element);
  return best;
}

GreedyResult finish(GainState& state, std::vector<double> gains) {
  GreedyResult r;
  r.selected.assign(state.selected().begin(), state.selected().end());
  r.gains = std::move(gains);
  r.final_value = state.value();
  return r;
}

}  // namespace

GreedyResult naive_greedy(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                          std::size_t k) {
  check_budget(k, kernel.size());
  GainState state(kind, kernel);
  std::vector<LocalIndex> remaining(kernel.size());
  std::iota(remaining.begin(), remaining.end(), LocalIndex{0});
  std::vector<double> gains;
  gains.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    const Pick p = pick_best(state, remaining);
    state.commit(p.element);
    gains.push_back(p.gain);
    // Keep `remaining` ascending so scans stay in index order.
    remaining.erase(std::lower_bound(remaining.begin(), remaining.end(), p.element));
  }
  return finish(state, std::move(gains));
}

std::size_t stochastic_pool_size(std::size_t m, std::size_t k, std::size_t remaining,
                                 double epsilon) {
  if (k == 0) return 0;
  const double raw = std::ceil(static_cast<double>(m) / static_cast<double>(k) *
                               std::log(1.0 / epsilon));
  const std::size_t s = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
  return std::min(remaining, s);
}

GreedyResult stochastic_greedy(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                               std::size_t k, double epsilon, RngStream& rng) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidEpsilon,
                "epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  }
  const std::size_t m = kernel.size();
  check_budget(k, m);
  GainState state(kind, kernel);
  std::vector<LocalIndex> remaining(m);
  std::iota(remaining.begin(), remaining.end(), LocalIndex{0});
  std::vector<double> gains;
  gains.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    const std::size_t rem = remaining.size();
    const std::size_t s = stochastic_pool_size(m, k, rem, epsilon);
    if (s < rem) {
      for (std::size_t i = 0; i < s; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(rem - i));
        std::swap(remaining[i], remaining[j]);
      }
    }
    const Pick p = pick_best(state, std::span<const LocalIndex>(remaining.data(), s));
    state.commit(p.element);
    gains.push_back(p.gain);
    auto it = std::find(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(s),
                        p.element);
    *it = remaining.back();
    remaining.pop_back();
  }
  return finish(state, std::move(gains));
}

std::vector<double> greedy_sample_importance(const SetFunctionKind& kind,
                                             const SimilarityKernel& kernel) {
  const GreedyResult r = naive_greedy(kind, kernel, kernel.size());
  std::vector<double> g(kernel.size(), 0.0);
  for (std::size_t t = 0; t < r.selected.size(); ++t) g[r.selected[t]] = r.gains[t];
  return g;
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // c stays exact: c * (n - i) / (i + 1) is C(n, i + 1).
  std::uint64_t c = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    std::uint64_t product = 0;
    if (__builtin_mul_overflow(c, n - i, &product)) return cap + 1;
    c = product / (i + 1);
    if (c > cap) return cap + 1;
  }
  return c;
}

BruteForceResult brute_force_opt(const SetFunctionKind& kind, const SimilarityKernel& kernel,
                                 std::size_t k, std::uint64_t cap) {
  const std::size_t m = kernel.size();
  check_budget(k, m);
  const std::uint64_t count = binomial_capped(m, k, cap);
  if (count > cap) {
    throw Error(ErrorCode::kInstanceTooLarge, "C(" + std::to_string(m) + ", " +
                                                  std::to_string(k) + ") exceeds the cap of " +
                                                  std::to_string(cap) + " subsets");
  }
  std::vector<LocalIndex> current(k);
  std::iota(current.begin(), current.end(), LocalIndex{0});
  BruteForceResult best{current, evaluate(kind, kernel, current)};
  if (k == 0) return best;
  while (true) {
    // Advance to the next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && current[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
    const double v = evaluate(kind, kernel, current);
    if (v > best.value) best = {current, v};
  }
  return best;
}

}  // namespace milo
