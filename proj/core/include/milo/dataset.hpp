#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "milo/binary_io.hpp"

namespace milo {

using ClassId = std::uint32_t;
using GlobalIndex = std::uint32_t;

/// n x d row-major matrix of finite 32-bit floats.
class EmbeddingMatrix {
 public:
  // Throws NonFiniteValue on the first NaN/Inf and InvalidConfig when
  // n == 0, d == 0 or values.size() != n * d.
  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> values_;
};

/// Dense class ids in [0, num_classes).
class LabelVector {
 public:
  // Throws NonDenseClassIds naming the smallest id missing below the maximum.
  explicit LabelVector(std::vector<ClassId> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t num_classes() const noexcept { return num_classes_; }
  ClassId operator[](std::size_t i) const noexcept { return labels_[i]; }
  std::span<const ClassId> labels() const noexcept { return labels_; }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<ClassId> labels_;
  std::size_t num_classes_;
};

struct DatasetHandle {
  EmbeddingMatrix embeddings;
  LabelVector labels;

  std::size_t size() const noexcept { return embeddings.rows(); }
};

// Throws LengthMismatch(e.rows, l.size).
DatasetHandle make_dataset(EmbeddingMatrix embeddings, LabelVector labels);

// MEMB: "MEMB", u32 version=1, u64 n, u32 d, u8 dtype (0 = f32), n*d f32 LE.
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 0;
// MLBL: "MLBL", u32 version=1, u64 n, n u32 LE class ids.
inline constexpr std::uint32_t kLabelFormatVersion = 1;

Bytes encode_embeddings(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes, const std::string& source);
Bytes encode_labels(const LabelVector& l);
LabelVector decode_labels(std::span<const std::uint8_t> bytes, const std::string& source);

EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
LabelVector load_labels(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);
void write_labels(const std::filesystem::path& path, const LabelVector& l);

}  // namespace milo
