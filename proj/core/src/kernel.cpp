#include "milo/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "milo/error.hpp"

namespace milo {

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::kCosine: return "cosine";
    case Metric::kDot: return "dot";
    case Metric::kRbf: return "rbf";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "dot") return Metric::kDot;
  if (name == "rbf") return Metric::kRbf;
  throw Error(ErrorCode::kInvalidMetric, "unknown metric \"" + std::string(name) + "\"");
}

void MetricConfig::validate() const {
  if (metric == Metric::kRbf && !(kw > 0.0 && std::isfinite(kw))) {
    throw Error(ErrorCode::kInvalidMetric, "rbf kernel width kw must be positive");
  }
}

SimilarityKernel::SimilarityKernel(std::vector<GlobalIndex> indices, std::vector<float> values,
                                   KernelScaling scaling)
    : indices_(std::move(indices)), values_(std::move(values)), scaling_(scaling) {
  const std::size_t m = indices_.size();
  if (m == 0) throw Error(ErrorCode::kEmptyIndexList, "kernel over an empty index list");
  if (values_.size() != m * m) {
    throw Error(ErrorCode::kInvalidConfig, "kernel needs " + std::to_string(m * m) +
                                               " values, got " + std::to_string(values_.size()));
  }
  row_sums_.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const float v = values_[i * m + j];
      if (!std::isfinite(v) || v < 0.0f) {
        throw Error(ErrorCode::kInvalidConfig, "kernel entry (" + std::to_string(i) + "," +
                                                   std::to_string(j) +
                                                   ") is negative or non-finite");
      }
      if (v != values_[j * m + i]) {
        throw Error(ErrorCode::kInvalidConfig, "kernel is not symmetric at (" +
                                                   std::to_string(i) + "," + std::to_string(j) +
                                                   ")");
      }
      row_sums_[i] += v;
    }
  }
}

SimilarityKernel SimilarityKernel::from_values(std::size_t m, std::vector<float> values) {
  std::vector<GlobalIndex> idx(m);
  std::iota(idx.begin(), idx.end(), GlobalIndex{0});
  return SimilarityKernel(std::move(idx), std::move(values));
}

namespace {

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - b[i];
    acc += diff * diff;
  }
  return acc;
}

// Fills the upper triangle with f(i, j) and mirrors it.
template <typename F>
std::vector<double> pairwise(const EmbeddingMatrix& e, std::span<const GlobalIndex> idx, F f) {
  const std::size_t m = idx.size();
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double v = f(e.row(idx[i]), e.row(idx[j]));
      out[i * m + j] = v;
      out[j * m + i] = v;
    }
  }
  return out;
}

}  // namespace

SimilarityKernel build_kernel(const EmbeddingMatrix& e, std::span<const GlobalIndex> idx,
                              const MetricConfig& cfg) {
  cfg.validate();
  const std::size_t m = idx.size();
  if (m == 0) throw Error(ErrorCode::kEmptyIndexList, "kernel over an empty index list");
  for (GlobalIndex g : idx) {
    if (g >= e.rows()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "row " + std::to_string(g) + " outside embedding matrix of " +
                      std::to_string(e.rows()) + " rows");
    }
  }

  std::vector<float> values(m * m);
  KernelScaling scaling;
  switch (cfg.metric) {
    case Metric::kCosine: {
      std::vector<double> norms(m);
      for (std::size_t i = 0; i < m; ++i) {
        norms[i] = std::sqrt(dot(e.row(idx[i]), e.row(idx[i])));
        if (norms[i] == 0.0) {
          throw Error(ErrorCode::kZeroNormEmbedding,
                      "cosine similarity undefined for zero-norm row " + std::to_string(idx[i]));
        }
      }
      for (std::size_t i = 0; i < m; ++i) {
        values[i * m + i] = 1.0f;
        for (std::size_t j = i + 1; j < m; ++j) {
          const double cos = std::clamp(dot(e.row(idx[i]), e.row(idx[j])) / (norms[i] * norms[j]),
                                        -1.0, 1.0);
          const auto s = static_cast<float>(0.5 + 0.5 * cos);
          values[i * m + j] = s;
          values[j * m + i] = s;
        }
      }
      break;
    }
    case Metric::kDot: {
      const std::vector<double> raw = pairwise(e, idx, dot);
      const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
      scaling.dot_min = *lo;
      scaling.dot_max = *hi;
      const double range = scaling.dot_max - scaling.dot_min;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        values[i] = range > 0.0
                        ? static_cast<float>(std::clamp((raw[i] - scaling.dot_min) / range, 0.0, 1.0))
                        : 1.0f;
      }
      break;
    }
    case Metric::kRbf: {
      const std::vector<double> dist = pairwise(e, idx, squared_distance);
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) total += dist[i * m + j];
      }
      const std::size_t pairs = m * (m - 1) / 2;
      scaling.mean_dist = pairs > 0 ? total / static_cast<double>(pairs) : 0.0;
      const double denom = cfg.kw * scaling.mean_dist;
      for (std::size_t i = 0; i < dist.size(); ++i) {
        values[i] = denom > 0.0 ? static_cast<float>(std::exp(-dist[i] / denom)) : 1.0f;
      }
      break;
    }
  }
  return SimilarityKernel(std::vector<GlobalIndex>(idx.begin(), idx.end()), std::move(values),
                          scaling);
}

std::size_t ClassPartition::total_budget() const noexcept {
  return std::accumulate(budgets.begin(), budgets.end(), std::size_t{0});
}

std::size_t ClassPartition::dataset_size() const noexcept {
  std::size_t n = 0;
  for (const auto& m : members) n += m.size();
  return n;
}

ClassPartition partition_by_class(const LabelVector& labels, std::size_t k) {
  const std::size_t n = labels.size();
  if (k > n) {
    throw Error(ErrorCode::kBudgetExceedsDataset, "budget " + std::to_string(k) +
                                                      " exceeds dataset size " + std::to_string(n));
  }
  ClassPartition p;
  p.members.resize(labels.num_classes());
  for (std::size_t i = 0; i < n; ++i) p.members[labels[i]].push_back(static_cast<GlobalIndex>(i));

  const std::size_t c = p.members.size();
  p.budgets.assign(c, 0);
  if (k == 0) return p;

  // Quota k*m_c/n in exact integer arithmetic: floor plus remainder numerator.
  std::vector<std::uint64_t> remainder(c);
  std::size_t assigned = 0;
  for (std::size_t cls = 0; cls < c; ++cls) {
    const std::uint64_t scaled = static_cast<std::uint64_t>(k) * p.members[cls].size();
    p.budgets[cls] = static_cast<std::size_t>(scaled / n);
    remainder[cls] = scaled % n;
    assigned += p.budgets[cls];
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < k; ++i, ++assigned) ++p.budgets[order[i]];
  return p;
}

std::size_t peak_kernel_entries(const ClassPartition& p) noexcept {
  std::size_t peak = 0;
  for (const auto& m : p.members) peak = std::max(peak, m.size() * m.size());
  return peak;
}

}  // namespace milo
