#include "milo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "milo/error.hpp"

namespace milo {

namespace {

void check_finite(std::span<const float> values, std::size_t cols) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite embedding value at row " +
                                                  std::to_string(i / cols) + ", col " +
                                                  std::to_string(i % cols));
    }
  }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) {
    throw Error(ErrorCode::kInvalidConfig, "embedding matrix must have n >= 1 and d >= 1");
  }
  if (values_.size() / cols_ != rows_ || values_.size() % cols_ != 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "embedding payload has " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  check_finite(values_, cols_);
}

LabelVector::LabelVector(std::vector<ClassId> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) {
    num_classes_ = 0;
    return;
  }
  const ClassId max_id = *std::max_element(labels_.begin(), labels_.end());
  std::vector<bool> seen(static_cast<std::size_t>(max_id) + 1, false);
  for (ClassId id : labels_) seen[id] = true;
  auto missing = std::find(seen.begin(), seen.end(), false);
  if (missing != seen.end()) {
    throw Error(ErrorCode::kNonDenseClassIds,
                "class ids are not dense: id " + std::to_string(missing - seen.begin()) +
                    " is absent");
  }
  num_classes_ = static_cast<std::size_t>(max_id) + 1;
}

DatasetHandle make_dataset(EmbeddingMatrix embeddings, LabelVector labels) {
  if (embeddings.rows() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "embeddings have " + std::to_string(embeddings.rows()) + " rows but labels have " +
                    std::to_string(labels.size()) + " entries");
  }
  return DatasetHandle{std::move(embeddings), std::move(labels)};
}

Bytes encode_embeddings(const EmbeddingMatrix& m) {
  ByteWriter w;
  w.magic("MEMB");
  w.u32(kEmbeddingFormatVersion);
  w.u64(m.rows());
  w.u32(static_cast<std::uint32_t>(m.cols()));
  w.u8(kDtypeF32);
  for (float v : m.values()) w.f32(v);
  return std::move(w).bytes();
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, source);
  r.expect_magic("MEMB");
  const std::uint32_t version = r.u32();
  if (version != kEmbeddingFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                source + ": unsupported MEMB version " + std::to_string(version) + " at offset 4");
  }
  const std::uint64_t n = r.u64();
  const std::uint32_t d = r.u32();
  const std::size_t dtype_offset = r.offset();
  const std::uint8_t dtype = r.u8();
  if (dtype != kDtypeF32) {
    throw Error(ErrorCode::kUnsupportedVersion, source + ": unsupported dtype code " +
                                                    std::to_string(dtype) + " at offset " +
                                                    std::to_string(dtype_offset));
  }
  if (n == 0 || d == 0) {
    throw Error(ErrorCode::kInvalidConfig, source + ": header declares an empty matrix");
  }
  if (n > std::numeric_limits<std::uint64_t>::max() / 4 / d) {
    throw Error(ErrorCode::kTruncatedFile, source + ": header dimensions overflow");
  }
  r.require(n * d * 4);
  const std::size_t payload_offset = r.offset();
  std::vector<float> values(n * d);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = r.f32();
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  source + ": non-finite value at row " + std::to_string(i / d) + ", col " +
                      std::to_string(i % d) + " (offset " +
                      std::to_string(payload_offset + 4 * i) + ")");
    }
  }
  r.expect_end();
  return EmbeddingMatrix(n, d, std::move(values));
}

Bytes encode_labels(const LabelVector& l) {
  ByteWriter w;
  w.magic("MLBL");
  w.u32(kLabelFormatVersion);
  w.u64(l.size());
  for (ClassId id : l.labels()) w.u32(id);
  return std::move(w).bytes();
}

LabelVector decode_labels(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, source);
  r.expect_magic("MLBL");
  const std::uint32_t version = r.u32();
  if (version != kLabelFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                source + ": unsupported MLBL version " + std::to_string(version) + " at offset 4");
  }
  const std::uint64_t n = r.u64();
  if (n > r.remaining() / 4) {
    throw Error(ErrorCode::kTruncatedFile,
                source + ": header declares " + std::to_string(n) + " labels but only " +
                    std::to_string(r.remaining()) + " payload bytes follow offset " +
                    std::to_string(r.offset()));
  }
  std::vector<ClassId> labels(n);
  for (auto& id : labels) id = r.u32();
  r.expect_end();
  return LabelVector(std::move(labels));
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return decode_embeddings(bytes, path.string());
}

LabelVector load_labels(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return decode_labels(bytes, path.string());
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  write_file(path, encode_embeddings(m));
}

void write_labels(const std::filesystem::path& path, const LabelVector& l) {
  write_file(path, encode_labels(l));
}

}  // namespace milo
