#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "milo/dataset.hpp"
#include "milo/exploration.hpp"
#include "milo/kernel.hpp"

namespace milo {

inline constexpr double kDefaultKappa = 1.0 / 6.0;
inline constexpr double kDefaultEpsilon = 0.01;
inline constexpr std::size_t kDefaultInterval = 1;

struct CurriculumConfig {
  std::size_t epochs = 1;                   // T
  std::size_t interval = kDefaultInterval;  // R, epochs between subset refreshes
  double kappa = kDefaultKappa;             // fraction of epochs on SGE subsets
  std::size_t subset_size = 0;              // k
  double lambda = kDefaultGraphCutLambda;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  MetricConfig metric;

  // Throws InvalidConfig / InvalidEpsilon / InvalidMetric.
  void validate() const;

  // floor(kappa * T). A 1e-9 slack absorbs representation error so that
  // e.g. kappa = 1/6, T = 24 yields 4 rather than 3.
  std::size_t sge_epochs() const noexcept;
  // ceil(sge_epochs / R).
  std::size_t sge_subset_count() const noexcept;

  friend bool operator==(const CurriculumConfig&, const CurriculumConfig&) = default;
};

/// Everything needed to replay the schedule: graph-cut SGE subsets for the
/// first sge_epochs epochs, and per-class disparity-min sampling
/// distributions from which later epochs are drawn lazily.
struct CurriculumPlan {
  CurriculumConfig config;
  std::size_t dataset_size = 0;
  ClassPartition partition;
  SubsetFamily family;
  SamplingDistribution distribution;
  std::vector<KernelScaling> kernel_scaling;  // per class

  friend bool operator==(const CurriculumPlan&, const CurriculumPlan&) = default;
};

struct BuildStats {
  std::size_t peak_kernel_entries = 0;  // largest number of kernel entries alive at once
  double kernel_seconds = 0.0;
  double sge_seconds = 0.0;
  double importance_seconds = 0.0;
  double total_seconds = 0.0;
};

// MILO_THREADS if set to a positive integer, else hardware concurrency.
unsigned default_thread_count();

// Builds one class at a time per worker: kernel, SGE subsets, importance
// distribution, then the kernel is released. Output does not depend on
// `threads`. Throws BudgetExceedsDataset when k > n plus anything the kernel
// or maximizer modules raise.
CurriculumPlan build_plan(const DatasetHandle& ds, const CurriculumConfig& cfg,
                          BuildStats* stats = nullptr, unsigned threads = 1);

// SGE subset t / R for t < sge_epochs; afterwards the weighted-random draw of
// phase (t - sge_epochs) / R. Throws EpochOutOfRange for t >= T.
Subset subset_for_epoch(const CurriculumPlan& plan, std::size_t epoch);

std::vector<std::pair<std::size_t, Subset>> full_schedule(const CurriculumPlan& plan);

}  // namespace milo
