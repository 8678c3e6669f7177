#include "milo/set_function.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "milo/error.hpp"

namespace milo {

std::string_view set_function_name(SetFunctionType t) noexcept {
  switch (t) {
    case SetFunctionType::kFacilityLocation: return "facility_location";
    case SetFunctionType::kGraphCut: return "graph_cut";
    case SetFunctionType::kDisparitySum: return "disparity_sum";
    case SetFunctionType::kDisparityMin: return "disparity_min";
  }
  return "unknown";
}

SetFunctionType parse_set_function(std::string_view name) {
  if (name == "facility_location" || name == "fl") return SetFunctionType::kFacilityLocation;
  if (name == "graph_cut" || name == "gc") return SetFunctionType::kGraphCut;
  if (name == "disparity_sum" || name == "dsum") return SetFunctionType::kDisparitySum;
  if (name == "disparity_min" || name == "dmin") return SetFunctionType::kDisparityMin;
  throw Error(ErrorCode::kInvalidConfig, "unknown set function \"" + std::string(name) + "\"");
}

double evaluate(const SetFunctionKind& kind, const SimilarityKernel& k,
                std::span<const LocalIndex> s) {
  const std::size_t m = k.size();
  std::vector<char> seen(m, 0);
  for (LocalIndex e : s) {
    if (e >= m) {
      throw Error(ErrorCode::kIndexOutOfRange, "local index " + std::to_string(e) +
                                                   " outside kernel of size " + std::to_string(m));
    }
    if (seen[e]) {
      throw Error(ErrorCode::kAlreadySelected, "duplicate local index " + std::to_string(e));
    }
    seen[e] = 1;
  }
  if (s.empty()) return 0.0;

  double value = 0.0;
  switch (kind.type) {
    case SetFunctionType::kFacilityLocation:
      for (std::size_t i = 0; i < m; ++i) {
        float best = 0.0f;
        for (LocalIndex j : s) best = std::max(best, k(i, j));
        value += best;
      }
      break;
    case SetFunctionType::kGraphCut: {
      double cover = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        for (LocalIndex j : s) cover += k(i, j);
      }
      double within = 0.0;
      for (LocalIndex i : s) {
        for (LocalIndex j : s) within += k(i, j);
      }
      value = cover - kind.lambda * within;
      break;
    }
    case SetFunctionType::kDisparitySum:
      for (LocalIndex i : s) {
        for (LocalIndex j : s) value += 1.0 - static_cast<double>(k(i, j));
      }
      break;
    case SetFunctionType::kDisparityMin:
      if (s.size() < 2) return 0.0;
      value = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < s.size(); ++a) {
        for (std::size_t b = a + 1; b < s.size(); ++b) {
          value = std::min(value, 1.0 - static_cast<double>(k(s[a], s[b])));
        }
      }
      break;
  }
  return value;
}

GainState::GainState(const SetFunctionKind& kind, const SimilarityKernel& kernel)
    : kind_(kind), kernel_(&kernel), in_set_(kernel.size(), 0) {
  const double init = kind_.type == SetFunctionType::kDisparityMin
                          ? std::numeric_limits<double>::infinity()
                          : 0.0;
  aux_.assign(kernel.size(), init);
}

void GainState::check(LocalIndex e) const {
  if (e >= ground_size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "local index " + std::to_string(e) +
                                                 " outside kernel of size " +
                                                 std::to_string(ground_size()));
  }
  if (in_set_[e]) {
    throw Error(ErrorCode::kAlreadySelected, "local index " + std::to_string(e) +
                                                 " is already selected");
  }
}

double GainState::marginal_gain(LocalIndex e) const {
  check(e);
  return gain_unchecked(e);
}

double GainState::gain_unchecked(LocalIndex e) const noexcept {
  const SimilarityKernel& k = *kernel_;
  switch (kind_.type) {
    case SetFunctionType::kFacilityLocation: {
      double gain = 0.0;
      const auto col = k.row(e);  // symmetric
      for (std::size_t i = 0; i < col.size(); ++i) {
        const double d = static_cast<double>(col[i]) - aux_[i];
        if (d > 0.0) gain += d;
      }
      return gain;
    }
    case SetFunctionType::kGraphCut:
      return k.row_sums()[e] - kind_.lambda * (2.0 * aux_[e] + k(e, e));
    case SetFunctionType::kDisparitySum:
      return 2.0 * aux_[e] + (1.0 - static_cast<double>(k(e, e)));
    case SetFunctionType::kDisparityMin:
      if (selected_.empty()) return 0.0;
      if (selected_.size() == 1) return aux_[e];
      return std::min(min_distance_, aux_[e]) - min_distance_;
  }
  return 0.0;
}

void GainState::commit(LocalIndex e) {
  check(e);
  const SimilarityKernel& k = *kernel_;
  const auto col = k.row(e);
  switch (kind_.type) {
    case SetFunctionType::kFacilityLocation:
      for (std::size_t i = 0; i < col.size(); ++i) aux_[i] = std::max(aux_[i], double{col[i]});
      break;
    case SetFunctionType::kGraphCut:
      for (std::size_t i = 0; i < col.size(); ++i) aux_[i] += col[i];
      break;
    case SetFunctionType::kDisparitySum:
      for (std::size_t i = 0; i < col.size(); ++i) aux_[i] += 1.0 - static_cast<double>(col[i]);
      break;
    case SetFunctionType::kDisparityMin:
      if (selected_.size() == 1) {
        min_distance_ = aux_[e];
      } else if (selected_.size() >= 2) {
        min_distance_ = std::min(min_distance_, aux_[e]);
      }
      for (std::size_t i = 0; i < col.size(); ++i) {
        aux_[i] = std::min(aux_[i], 1.0 - static_cast<double>(col[i]));
      }
      break;
  }
  selected_.push_back(e);
  in_set_[e] = 1;
}

double GainState::value() const noexcept {
  const SimilarityKernel& k = *kernel_;
  double value = 0.0;
  switch (kind_.type) {
    case SetFunctionType::kFacilityLocation:
      for (double best : aux_) value += best;
      return value;
    case SetFunctionType::kGraphCut: {
      double within = 0.0;
      for (LocalIndex j : selected_) {
        value += k.row_sums()[j];
        within += aux_[j];
      }
      return value - kind_.lambda * within;
    }
    case SetFunctionType::kDisparitySum:
      for (LocalIndex j : selected_) value += aux_[j];
      return value;
    case SetFunctionType::kDisparityMin:
      return selected_.size() >= 2 ? min_distance_ : 0.0;
  }
  return value;
}

}  // namespace milo
