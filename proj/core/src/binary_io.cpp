#include "milo/binary_io.hpp"

#include <fstream>
#include <iterator>

#include "milo/error.hpp"

namespace milo {

void ByteWriter::magic(std::string_view tag) {
  for (char c : tag) buf_.push_back(static_cast<std::uint8_t>(c));
}

void ByteReader::expect_magic(std::string_view tag) {
  require(tag.size());
  for (std::size_t i = 0; i < tag.size(); ++i) {
    if (data_[pos_ + i] != static_cast<std::uint8_t>(tag[i])) {
      throw Error(ErrorCode::kBadMagic, source_ + ": expected magic \"" + std::string(tag) +
                                            "\" at offset " + std::to_string(pos_));
    }
  }
  pos_ += tag.size();
}

std::uint8_t ByteReader::u8() {
  require(1);
  return data_[pos_++];
}

void ByteReader::require(std::uint64_t count) const {
  if (count > remaining()) {
    throw Error(ErrorCode::kTruncatedFile,
                source_ + ": truncated at offset " + std::to_string(data_.size()) + ", needed " +
                    std::to_string(count) + " bytes from offset " + std::to_string(pos_));
  }
}

void ByteReader::expect_end() const {
  if (remaining() != 0) {
    throw Error(ErrorCode::kTruncatedFile, source_ + ": " + std::to_string(remaining()) +
                                               " unexpected trailing bytes at offset " +
                                               std::to_string(pos_));
  }
}

std::uint64_t ByteReader::get(int width) {
  require(static_cast<std::uint64_t>(width));
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += static_cast<std::size_t>(width);
  return v;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  Bytes out{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path.string());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace milo
