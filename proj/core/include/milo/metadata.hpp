#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "milo/binary_io.hpp"
#include "milo/curriculum.hpp"

namespace milo {

inline constexpr std::uint32_t kManifestFormatVersion = 1;
inline constexpr std::uint32_t kPayloadFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.txt";

// MSUB: "MSUB", u32 version, u64 count, count u32 LE indices (strictly ascending).
Bytes encode_subset(std::span<const GlobalIndex> indices);
std::vector<GlobalIndex> decode_subset(std::span<const std::uint8_t> bytes,
                                       const std::string& source);
// Decodes one MSUB record starting at the reader position.
std::vector<GlobalIndex> read_subset_record(ByteReader& reader);

// MPRB: "MPRB", u32 version, u64 count, count f64 LE.
Bytes encode_probabilities(std::span<const double> values);
std::vector<double> decode_probabilities(std::span<const std::uint8_t> bytes,
                                         const std::string& source);

// MIDX: "MIDX", u32 version, u64 count, count u32 LE global indices.
Bytes encode_indices(std::span<const GlobalIndex> indices);
std::vector<GlobalIndex> decode_indices(std::span<const std::uint8_t> bytes,
                                        const std::string& source);

struct StoreOptions {
  bool force = false;  // replace an existing non-empty directory
  // Called after each file lands in the staging directory; tests throw from
  // it to simulate an interrupted write.
  std::function<void(const std::string& file)> after_write;
};

// Writes the plan into a sibling staging directory and renames it over `dir`;
// the rename is the commit point, so readers see either the old directory or
// the new one. Serialization is canonical: equal plans give byte-identical
// directories. Throws DirectoryNotEmpty (without force), IoError.
void store_metadata(const std::filesystem::path& dir, const CurriculumPlan& plan,
                    const StoreOptions& options = {});

// Throws NotPreprocessed, VersionUnsupported, ChecksumMismatch,
// CorruptMetadata (missing keys or payloads, violated plan invariants).
CurriculumPlan load_metadata(const std::filesystem::path& dir);

// True iff load_metadata(dir) would succeed.
bool is_preprocessed(const std::filesystem::path& dir) noexcept;

// The manifest text store_metadata writes for `plan`.
std::string render_manifest(const CurriculumPlan& plan);

}  // namespace milo
