#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace milo {

using Bytes = std::vector<std::uint8_t>;

// Little-endian encoder for the fixed binary formats.
class ByteWriter {
 public:
  void magic(std::string_view tag);
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  const Bytes& bytes() const& { return buf_; }
  Bytes bytes() && { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes buf_;
};

// Little-endian decoder. Every read past the end throws TruncatedFile naming
// the source and the offset at which more bytes were needed.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string source)
      : data_(data), source_(std::move(source)) {}

  // Throws BadMagic if the next four bytes differ from `tag`.
  void expect_magic(std::string_view tag);
  std::uint8_t u8();
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  // Throws TruncatedFile unless at least `count` bytes remain.
  void require(std::uint64_t count) const;
  // Throws TruncatedFile (trailing garbage is reported the same way as a
  // short payload: the declared length does not match the file).
  void expect_end() const;

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::uint64_t get(int width);

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string source_;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace milo
