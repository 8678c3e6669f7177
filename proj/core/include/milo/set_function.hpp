#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "milo/kernel.hpp"

namespace milo {

using LocalIndex = std::size_t;

enum class SetFunctionType { kFacilityLocation, kGraphCut, kDisparitySum, kDisparityMin };

inline constexpr double kDefaultGraphCutLambda = 0.4;

struct SetFunctionKind {
  SetFunctionType type = SetFunctionType::kFacilityLocation;
  double lambda = kDefaultGraphCutLambda;  // graph-cut only

  static SetFunctionKind facility_location() { return {SetFunctionType::kFacilityLocation}; }
  static SetFunctionKind graph_cut(double lambda = kDefaultGraphCutLambda) {
    return {SetFunctionType::kGraphCut, lambda};
  }
  static SetFunctionKind disparity_sum() { return {SetFunctionType::kDisparitySum}; }
  static SetFunctionKind disparity_min() { return {SetFunctionType::kDisparityMin}; }

  friend bool operator==(const SetFunctionKind&, const SetFunctionKind&) = default;
};

std::string_view set_function_name(SetFunctionType t) noexcept;
// Accepts the long names ("facility_location", "graph_cut", "disparity_sum",
// "disparity_min") and the short forms "fl", "gc", "dsum", "dmin".
SetFunctionType parse_set_function(std::string_view name);

// Direct evaluation over the class ground set, S given as local indices:
//   facility_location  sum_i max_{j in S} s_ij
//   graph_cut          sum_i sum_{j in S} s_ij - lambda sum_{i,j in S} s_ij
//   disparity_sum      sum_{i,j in S} (1 - s_ij)
//   disparity_min      min_{i != j in S} (1 - s_ij), and 0 when |S| <= 1
// f(empty) = 0 for every kind.
double evaluate(const SetFunctionKind& kind, const SimilarityKernel& k,
                std::span<const LocalIndex> s);

/// Incremental marginal-gain oracle over one kernel. Caches one auxiliary per
/// ground element so each gain costs O(1), or O(m) for facility location:
///   facility_location  curmax_i = max_{j in S} s_ij
///   graph_cut          sum_{j in S} s_je
///   disparity_sum      sum_{j in S} (1 - s_je)
///   disparity_min      min_{j in S} (1 - s_je)
/// The kernel must outlive the state.
class GainState {
 public:
  GainState(const SetFunctionKind& kind, const SimilarityKernel& kernel);

  // f(S + e) - f(S). Throws IndexOutOfRange or AlreadySelected.
  double marginal_gain(LocalIndex e) const;
  // Same without argument checks; e must be an unselected in-range index.
  double gain_unchecked(LocalIndex e) const noexcept;
  // Throws IndexOutOfRange or AlreadySelected.
  void commit(LocalIndex e);

  // f(S) reconstructed from the cached auxiliaries.
  double value() const noexcept;

  std::span<const LocalIndex> selected() const noexcept { return selected_; }
  bool is_selected(LocalIndex e) const noexcept { return in_set_[e] != 0; }
  std::size_t ground_size() const noexcept { return in_set_.size(); }
  const SetFunctionKind& kind() const noexcept { return kind_; }
  const SimilarityKernel& kernel() const noexcept { return *kernel_; }

 private:
  void check(LocalIndex e) const;

  SetFunctionKind kind_;
  const SimilarityKernel* kernel_;
  std::vector<LocalIndex> selected_;
  std::vector<char> in_set_;
  std::vector<double> aux_;
  double min_distance_ = 0.0;  // disparity-min: current f(S) once |S| >= 2
};

}  // namespace milo
