#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "milo/dataset.hpp"

namespace milo {

enum class Metric { kCosine, kDot, kRbf };

std::string_view metric_name(Metric m) noexcept;
// Accepts "cosine", "dot", "rbf"; throws InvalidMetric otherwise.
Metric parse_metric(std::string_view name);

struct MetricConfig {
  Metric metric = Metric::kCosine;
  double kw = 1.0;  // RBF width multiplier, used only by kRbf

  void validate() const;
  friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

// Constants a kernel was normalized with; persisted for reproducibility.
struct KernelScaling {
  double dot_min = 0.0;    // kDot: smallest raw inner product
  double dot_max = 0.0;    // kDot: largest raw inner product
  double mean_dist = 0.0;  // kRbf: mean squared distance over i < j pairs

  friend bool operator==(const KernelScaling&, const KernelScaling&) = default;
};

/// Symmetric, non-negative m x m similarity matrix over one class.
/// Local index i refers to global sample indices()[i].
class SimilarityKernel {
 public:
  // Validates shape, symmetry and non-negativity. Row sums are accumulated in
  // double for the graph-cut ground-set term.
  SimilarityKernel(std::vector<GlobalIndex> indices, std::vector<float> values,
                   KernelScaling scaling = {});

  // Kernel over local indices 0..m-1 with identity global mapping.
  static SimilarityKernel from_values(std::size_t m, std::vector<float> values);

  std::size_t size() const noexcept { return indices_.size(); }
  float operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * size() + j]; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * size(), size()};
  }
  std::span<const GlobalIndex> indices() const noexcept { return indices_; }
  std::span<const double> row_sums() const noexcept { return row_sums_; }
  const KernelScaling& scaling() const noexcept { return scaling_; }
  std::size_t entry_count() const noexcept { return values_.size(); }

 private:
  std::vector<GlobalIndex> indices_;
  std::vector<float> values_;
  std::vector<double> row_sums_;
  KernelScaling scaling_;
};

// Similarities between the rows listed in `idx`:
//   cosine: 0.5 + 0.5 cos(r_i, r_j), diagonal exactly 1
//   dot:    min-max scaled inner products, all-ones when every product is equal
//   rbf:    exp(-|r_i - r_j|^2 / (kw * mean_dist)), all-ones when mean_dist == 0
// Throws EmptyIndexList, IndexOutOfRange, ZeroNormEmbedding (cosine only).
SimilarityKernel build_kernel(const EmbeddingMatrix& e, std::span<const GlobalIndex> idx,
                              const MetricConfig& cfg);

struct ClassPartition {
  std::vector<std::vector<GlobalIndex>> members;  // ascending global indices per class
  std::vector<std::size_t> budgets;               // sums to total_budget

  std::size_t num_classes() const noexcept { return members.size(); }
  std::size_t class_size(std::size_t c) const noexcept { return members[c].size(); }
  std::size_t total_budget() const noexcept;
  std::size_t dataset_size() const noexcept;

  friend bool operator==(const ClassPartition&, const ClassPartition&) = default;
};

// Proportional budgets by largest remainder (Hamilton); remainder ties go to
// the smaller class id. Throws BudgetExceedsDataset when k > n.
ClassPartition partition_by_class(const LabelVector& labels, std::size_t k);

// Largest per-class kernel, in entries: max_c m_c^2.
std::size_t peak_kernel_entries(const ClassPartition& p) noexcept;

}  // namespace milo
