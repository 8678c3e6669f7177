#include "milo/metadata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "milo/error.hpp"

namespace fs = std::filesystem;

namespace milo {

// ---------------------------------------------------------------------------
// Payload codecs

namespace {

void expect_version(ByteReader& r, const char* format) {
  const std::size_t offset = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kPayloadFormatVersion) {
    throw Error(ErrorCode::kVersionUnsupported,
                r.source() + ": unsupported " + format + " version " + std::to_string(version) +
                    " at offset " + std::to_string(offset));
  }
}

std::uint64_t read_count(ByteReader& r, std::size_t width) {
  const std::uint64_t count = r.u64();
  if (count > r.remaining() / width) {
    throw Error(ErrorCode::kTruncatedFile, r.source() + ": declares " + std::to_string(count) +
                                               " entries but only " +
                                               std::to_string(r.remaining()) +
                                               " bytes follow offset " + std::to_string(r.offset()));
  }
  return count;
}

Bytes encode_u32_list(const char* magic, std::span<const GlobalIndex> indices) {
  ByteWriter w;
  w.magic(magic);
  w.u32(kPayloadFormatVersion);
  w.u64(indices.size());
  for (GlobalIndex i : indices) w.u32(i);
  return std::move(w).bytes();
}

}  // namespace

Bytes encode_subset(std::span<const GlobalIndex> indices) { return encode_u32_list("MSUB", indices); }

std::vector<GlobalIndex> read_subset_record(ByteReader& r) {
  r.expect_magic("MSUB");
  expect_version(r, "MSUB");
  std::vector<GlobalIndex> out(read_count(r, 4));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = r.u32();
    if (i > 0 && out[i] <= out[i - 1]) {
      throw Error(ErrorCode::kCorruptMetadata,
                  r.source() + ": subset indices not strictly ascending at entry " +
                      std::to_string(i));
    }
  }
  return out;
}

std::vector<GlobalIndex> decode_subset(std::span<const std::uint8_t> bytes,
                                       const std::string& source) {
  ByteReader r(bytes, source);
  auto out = read_subset_record(r);
  r.expect_end();
  return out;
}

Bytes encode_probabilities(std::span<const double> values) {
  ByteWriter w;
  w.magic("MPRB");
  w.u32(kPayloadFormatVersion);
  w.u64(values.size());
  for (double v : values) w.f64(v);
  return std::move(w).bytes();
}

std::vector<double> decode_probabilities(std::span<const std::uint8_t> bytes,
                                         const std::string& source) {
  ByteReader r(bytes, source);
  r.expect_magic("MPRB");
  expect_version(r, "MPRB");
  std::vector<double> out(read_count(r, 8));
  for (double& v : out) v = r.f64();
  r.expect_end();
  return out;
}

Bytes encode_indices(std::span<const GlobalIndex> indices) { return encode_u32_list("MIDX", indices); }

std::vector<GlobalIndex> decode_indices(std::span<const std::uint8_t> bytes,
                                        const std::string& source) {
  ByteReader r(bytes, source);
  r.expect_magic("MIDX");
  expect_version(r, "MIDX");
  std::vector<GlobalIndex> out(read_count(r, 4));
  for (GlobalIndex& i : out) i = r.u32();
  r.expect_end();
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct PayloadFile {
  std::string name;
  Bytes bytes;
};

class ManifestWriter {
 public:
  void comment(const std::string& text) { out_ << "# " << text << '\n'; }
  void section(const std::string& name) { out_ << "\n[" << name << "]\n"; }
  template <typename T>
  void kv(const std::string& key, const T& value) {
    out_ << key << " = " << value << '\n';
  }
  void kv(const std::string& key, double value) { kv(key, format_double(value)); }
  void file(const std::string& key, const PayloadFile& f) {
    kv(key, f.name);
    kv(key + "_fnv1a", format_hex(fnv1a64(f.bytes)));
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

struct Rendered {
  std::string manifest;
  std::vector<PayloadFile> payloads;
};

Rendered render(const CurriculumPlan& plan) {
  const CurriculumConfig& cfg = plan.config;
  const ClassPartition& part = plan.partition;
  const std::size_t classes = part.num_classes();
  if (plan.distribution.classes.size() != classes || plan.kernel_scaling.size() != classes) {
    throw Error(ErrorCode::kInvalidConfig, "plan distribution does not match its partition");
  }

  std::vector<ClassId> class_of(plan.dataset_size, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    for (GlobalIndex g : part.members[c]) class_of.at(g) = static_cast<ClassId>(c);
  }

  ManifestWriter m;
  m.comment("curriculum subset-selection metadata");
  m.kv("format_version", kManifestFormatVersion);
  m.kv("payload_version", kPayloadFormatVersion);
  m.kv("n", plan.dataset_size);
  m.kv("c", classes);
  m.kv("k", cfg.subset_size);
  m.kv("T", cfg.epochs);
  m.kv("R", cfg.interval);
  m.kv("kappa", cfg.kappa);
  m.kv("lambda", cfg.lambda);
  m.kv("epsilon", cfg.epsilon);
  m.kv("seed", cfg.seed);
  m.kv("metric", std::string(metric_name(cfg.metric.metric)));
  m.kv("kw", cfg.metric.kw);
  m.kv("sge_epochs", cfg.sge_epochs());
  m.kv("n_sge", plan.family.subsets.size());

  Rendered out;
  for (std::size_t c = 0; c < classes; ++c) {
    const ClassDistribution& d = plan.distribution.classes[c];
    const KernelScaling& ks = plan.kernel_scaling[c];
    const std::string prefix = "class" + std::to_string(c);
    m.section("class " + std::to_string(c));
    m.kv("size", part.members[c].size());
    m.kv("budget", part.budgets[c]);
    m.kv("dot_min", ks.dot_min);
    m.kv("dot_max", ks.dot_max);
    m.kv("mean_dist", ks.mean_dist);

    PayloadFile idx{prefix + ".midx", encode_indices(d.indices)};
    PayloadFile prob{prefix + ".mprb", encode_probabilities(d.probabilities)};
    PayloadFile gains{prefix + ".gains.mprb", encode_probabilities(d.gains)};
    m.file("indices", idx);
    m.file("probabilities", prob);
    m.file("gains", gains);
    out.payloads.push_back(std::move(idx));
    out.payloads.push_back(std::move(prob));
    out.payloads.push_back(std::move(gains));

    for (std::size_t i = 0; i < plan.family.subsets.size(); ++i) {
      std::vector<GlobalIndex> mine;
      for (GlobalIndex g : plan.family.subsets[i]) {
        if (class_of.at(g) == c) mine.push_back(g);
      }
      PayloadFile sub{prefix + ".sge" + std::to_string(i) + ".msub", encode_subset(mine)};
      m.file("sge_" + std::to_string(i), sub);
      out.payloads.push_back(std::move(sub));
    }
  }
  out.manifest = m.str();
  return out;
}

// Parsed manifest: global keys plus one key map per "[class N]" section.
struct Manifest {
  using Section = std::map<std::string, std::string, std::less<>>;
  Section global;
  std::vector<Section> classes;
};

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptMetadata, "metadata manifest: " + what);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Manifest parse_manifest(const std::string& text) {
  Manifest m;
  Manifest::Section* current = &m.global;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const std::string expected = "[class " + std::to_string(m.classes.size()) + "]";
      if (line != expected) corrupt("line " + std::to_string(line_no) + ": expected " + expected);
      m.classes.emplace_back();
      current = &m.classes.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) corrupt("line " + std::to_string(line_no) + ": missing '='");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || !current->emplace(key, value).second) {
      corrupt("line " + std::to_string(line_no) + ": empty or duplicate key \"" + key + "\"");
    }
  }
  return m;
}

const std::string& get(const Manifest::Section& s, std::string_view key) {
  auto it = s.find(key);
  if (it == s.end()) corrupt("missing key \"" + std::string(key) + "\"");
  return it->second;
}

std::uint64_t get_uint(const Manifest::Section& s, std::string_view key) {
  const std::string& v = get(s, key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    corrupt("key \"" + std::string(key) + "\" is not an unsigned integer");
  }
  return out;
}

double get_double(const Manifest::Section& s, std::string_view key) {
  const std::string& v = get(s, key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    corrupt("key \"" + std::string(key) + "\" is not a finite number");
  }
  return out;
}

// Reads a payload named by `key` and checks it against `key`_fnv1a.
Bytes read_payload(const fs::path& dir, const Manifest::Section& s, const std::string& key) {
  const std::string& name = get(s, key);
  if (name.find('/') != std::string::npos || name == "." || name == "..") {
    corrupt("payload name \"" + name + "\" is not a plain file name");
  }
  const fs::path path = dir / name;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) corrupt("payload " + name + " is missing");
  Bytes bytes = read_file(path);
  const std::string actual = format_hex(fnv1a64(bytes));
  const std::string& expected = get(s, key + "_fnv1a");
  if (actual != expected) {
    throw Error(ErrorCode::kChecksumMismatch, path.string() + ": checksum " + actual +
                                                  " does not match manifest " + expected);
  }
  return bytes;
}

fs::path sibling(const fs::path& dir, const std::string& suffix) {
  fs::path clean = dir.lexically_normal();
  if (clean.filename().empty()) clean = clean.parent_path();
  return clean.parent_path() / (clean.filename().string() + suffix + "-" + std::to_string(::getpid()));
}

template <typename F>
void wrap_fs(F&& f) {
  try {
    f();
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::kIoError, e.what());
  }
}

}  // namespace

std::string render_manifest(const CurriculumPlan& plan) { return render(plan).manifest; }

void store_metadata(const fs::path& dir, const CurriculumPlan& plan, const StoreOptions& options) {
  const Rendered r = render(plan);
  std::error_code ec;
  const bool exists = fs::exists(dir, ec);
  if (exists) {
    if (!fs::is_directory(dir, ec)) {
      throw Error(ErrorCode::kIoError, dir.string() + " exists and is not a directory");
    }
    if (!fs::is_empty(dir, ec) && !options.force) {
      throw Error(ErrorCode::kDirectoryNotEmpty,
                  dir.string() + " is not empty; pass force to overwrite");
    }
  }

  const fs::path staging = sibling(dir, ".staging");
  const fs::path backup = sibling(dir, ".previous");
  wrap_fs([&] {
    fs::remove_all(staging);
    fs::create_directories(staging);
  });
  try {
    for (const PayloadFile& f : r.payloads) {
      write_file(staging / f.name, f.bytes);
      if (options.after_write) options.after_write(f.name);
    }
    const std::string_view text = r.manifest;
    write_file(staging / kManifestName,
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    if (options.after_write) options.after_write(kManifestName);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  wrap_fs([&] {
    if (exists) {
      fs::remove_all(backup);
      fs::rename(dir, backup);
      fs::rename(staging, dir);
      fs::remove_all(backup);
    } else {
      if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
      fs::rename(staging, dir);
    }
  });
}

CurriculumPlan load_metadata(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  std::error_code ec;
  if (!fs::is_regular_file(manifest_path, ec)) {
    throw Error(ErrorCode::kNotPreprocessed, dir.string() + " has no " + kManifestName);
  }
  const Bytes manifest_bytes = read_file(manifest_path);
  const Manifest m =
      parse_manifest(std::string(manifest_bytes.begin(), manifest_bytes.end()));
  const Manifest::Section& g = m.global;

  const std::uint64_t version = get_uint(g, "format_version");
  const std::uint64_t payload_version = get_uint(g, "payload_version");
  if (version != kManifestFormatVersion || payload_version != kPayloadFormatVersion) {
    throw Error(ErrorCode::kVersionUnsupported,
                manifest_path.string() + ": unsupported format_version " + std::to_string(version) +
                    " / payload_version " + std::to_string(payload_version));
  }

  CurriculumPlan plan;
  CurriculumConfig& cfg = plan.config;
  plan.dataset_size = get_uint(g, "n");
  const std::size_t classes = get_uint(g, "c");
  cfg.subset_size = get_uint(g, "k");
  cfg.epochs = get_uint(g, "T");
  cfg.interval = get_uint(g, "R");
  cfg.kappa = get_double(g, "kappa");
  cfg.lambda = get_double(g, "lambda");
  cfg.epsilon = get_double(g, "epsilon");
  cfg.seed = get_uint(g, "seed");
  try {
    cfg.metric.metric = parse_metric(get(g, "metric"));
  } catch (const Error& e) {
    corrupt(e.what());
  }
  cfg.metric.kw = get_double(g, "kw");
  try {
    cfg.validate();
  } catch (const Error& e) {
    corrupt(std::string("invalid configuration: ") + e.what());
  }
  const std::size_t n_sge = get_uint(g, "n_sge");
  if (n_sge != cfg.sge_subset_count() || get_uint(g, "sge_epochs") != cfg.sge_epochs()) {
    corrupt("n_sge/sge_epochs inconsistent with T, R and kappa");
  }
  if (m.classes.size() != classes) corrupt("c does not match the number of class sections");

  plan.family.epsilon = cfg.epsilon;
  plan.family.seed = cfg.seed;
  plan.family.subsets.assign(n_sge, {});
  std::vector<char> covered(plan.dataset_size, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    const Manifest::Section& s = m.classes[c];
    const std::string label = "class " + std::to_string(c);
    const std::size_t size = get_uint(s, "size");
    const std::size_t budget = get_uint(s, "budget");
    if (budget > size) corrupt(label + ": budget exceeds class size");

    ClassDistribution d;
    d.indices = decode_indices(read_payload(dir, s, "indices"), label + " indices");
    d.probabilities =
        decode_probabilities(read_payload(dir, s, "probabilities"), label + " probabilities");
    d.gains = decode_probabilities(read_payload(dir, s, "gains"), label + " gains");
    if (d.indices.size() != size || d.probabilities.size() != size || d.gains.size() != size) {
      corrupt(label + ": payload lengths disagree with size");
    }
    if (size == 0 || !std::is_sorted(d.indices.begin(), d.indices.end())) {
      corrupt(label + ": member indices empty or unsorted");
    }
    double total = 0.0;
    for (double p : d.probabilities) {
      if (!(p > 0.0) || !std::isfinite(p)) corrupt(label + ": non-positive probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) corrupt(label + ": probabilities do not sum to 1");
    for (GlobalIndex gi : d.indices) {
      if (gi >= plan.dataset_size || covered[gi]) {
        corrupt(label + ": index " + std::to_string(gi) + " out of range or in two classes");
      }
      covered[gi] = 1;
    }

    for (std::size_t i = 0; i < n_sge; ++i) {
      const std::string key = "sge_" + std::to_string(i);
      const auto sub = decode_subset(read_payload(dir, s, key), label + " " + key);
      if (sub.size() != budget) corrupt(label + ": " + key + " does not match the budget");
      for (GlobalIndex gi : sub) {
        if (!std::binary_search(d.indices.begin(), d.indices.end(), gi)) {
          corrupt(label + ": " + key + " contains non-member " + std::to_string(gi));
        }
      }
      plan.family.subsets[i].insert(plan.family.subsets[i].end(), sub.begin(), sub.end());
    }

    plan.partition.members.push_back(d.indices);
    plan.partition.budgets.push_back(budget);
    plan.kernel_scaling.push_back(
        {get_double(s, "dot_min"), get_double(s, "dot_max"), get_double(s, "mean_dist")});
    plan.distribution.classes.push_back(std::move(d));
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    corrupt("classes do not cover every sample");
  }
  if (plan.partition.total_budget() != cfg.subset_size) corrupt("budgets do not sum to k");
  for (Subset& s : plan.family.subsets) std::sort(s.begin(), s.end());
  return plan;
}

bool is_preprocessed(const fs::path& dir) noexcept {
  try {
    load_metadata(dir);
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace milo
