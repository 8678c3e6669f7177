#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "milo/binary_io.hpp"
#include "milo/curriculum.hpp"
#include "milo/dataset.hpp"
#include "milo/error.hpp"
#include "milo/greedy.hpp"
#include "milo/kernel.hpp"
#include "milo/metadata.hpp"
#include "milo/set_function.hpp"

namespace fs = std::filesystem;

namespace milo::cli {

namespace {

// Usage problem detected by the CLI itself rather than the core library.
struct UsageError : std::runtime_error {
  UsageError(std::string code, const std::string& message)
      : std::runtime_error(message), code(std::move(code)) {}
  std::string code;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return kIo;
    case ErrorCode::kInstanceTooLarge: return kOracleCap;
    default: return kUsage;
  }
}

void require_file(const std::string& flag, const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw UsageError("missing_file", flag + " file not found: " + path);
  }
}

struct KernelInputs {
  std::string embeddings;
  std::string labels;
  std::optional<std::uint32_t> class_id;
  std::string metric = "cosine";
  double kw = 1.0;
  std::string function = "facility_location";
  double lambda = kDefaultGraphCutLambda;

  void add_to(CLI::App& app) {
    app.add_option("--embeddings", embeddings, "MEMB embedding file")->required();
    app.add_option("--labels", labels, "MLBL label file; restricts the ground set to --class");
    app.add_option("--class", class_id, "class whose kernel is evaluated (requires --labels)");
    app.add_option("--metric", metric, "similarity metric")
        ->check(CLI::IsMember({"cosine", "dot", "rbf"}));
    app.add_option("--kw", kw, "RBF width multiplier");
    app.add_option("--function", function,
                   "facility_location|graph_cut|disparity_sum|disparity_min (or fl|gc|dsum|dmin)")
        ->required();
    app.add_option("--lambda", lambda, "graph-cut tradeoff");
  }

  SetFunctionKind kind() const {
    SetFunctionKind k{parse_set_function(function), lambda};
    if (k.type == SetFunctionType::kGraphCut && !(lambda >= 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "--lambda must be >= 0");
    }
    return k;
  }

  SimilarityKernel build() const {
    require_file("--embeddings", embeddings);
    const EmbeddingMatrix e = load_embeddings(embeddings);
    std::vector<GlobalIndex> idx;
    if (!labels.empty()) {
      require_file("--labels", labels);
      if (!class_id) throw UsageError("usage", "--labels requires --class");
      const DatasetHandle ds = make_dataset(e, load_labels(labels));
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == *class_id) idx.push_back(static_cast<GlobalIndex>(i));
      }
      if (idx.empty()) {
        throw UsageError("usage", "class " + std::to_string(*class_id) + " has no samples");
      }
    } else {
      if (class_id) throw UsageError("usage", "--class requires --labels");
      idx.resize(e.rows());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<GlobalIndex>(i);
    }
    return build_kernel(e, idx, MetricConfig{parse_metric(metric), kw});
  }
};

// Subset files are either MSUB or text with one decimal index per line.
std::vector<GlobalIndex> read_subset_file(const std::string& path) {
  require_file("--subset", path);
  const Bytes bytes = read_file(path);
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "MSUB")) {
    return decode_subset(bytes, path);
  }
  std::vector<GlobalIndex> out;
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string token;
  while (in >> token) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() ||
        v > std::numeric_limits<GlobalIndex>::max()) {
      throw UsageError("bad_subset", path + ": \"" + token + "\" is not an index");
    }
    out.push_back(static_cast<GlobalIndex>(v));
  }
  return out;
}

std::vector<LocalIndex> to_local(const SimilarityKernel& k, std::span<const GlobalIndex> global) {
  std::vector<LocalIndex> local;
  local.reserve(global.size());
  for (GlobalIndex g : global) {
    auto it = std::lower_bound(k.indices().begin(), k.indices().end(), g);
    if (it == k.indices().end() || *it != g) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "index " + std::to_string(g) + " is not in the evaluated ground set");
    }
    local.push_back(static_cast<LocalIndex>(it - k.indices().begin()));
  }
  return local;
}

void write_text_subset(std::ostream& out, std::span<const GlobalIndex> s) {
  for (GlobalIndex g : s) out << g << '\n';
}

void write_bytes(std::ostream& out, std::span<const std::uint8_t> bytes) {
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string join(std::span<const std::size_t> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

template <typename Container>
std::string join_indices(const Container& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curriculum subset selection from feature embeddings"};
  app.require_subcommand(1);

  // preprocess
  std::string embeddings, labels, out_dir;
  std::optional<double> fraction;
  std::optional<std::size_t> size;
  CurriculumConfig cfg;
  cfg.epochs = 0;
  std::string metric = "cosine";
  bool force = false;
  auto* pre = app.add_subcommand("preprocess", "build and store curriculum metadata");
  pre->add_option("--embeddings", embeddings, "MEMB embedding file")->required();
  pre->add_option("--labels", labels, "MLBL label file")->required();
  pre->add_option("--out", out_dir, "metadata directory")->required();
  auto* frac_opt = pre->add_option("--fraction", fraction, "subset size as a fraction of n, in (0,1]");
  auto* size_opt = pre->add_option("--size", size, "subset size k");
  frac_opt->excludes(size_opt);
  pre->add_option("--epochs", cfg.epochs, "total epochs T")->required();
  pre->add_option("--r", cfg.interval, "selection interval R")->capture_default_str();
  pre->add_option("--kappa", cfg.kappa, "fraction of epochs on SGE subsets")
      ->capture_default_str();
  pre->add_option("--lambda", cfg.lambda, "graph-cut tradeoff")->capture_default_str();
  pre->add_option("--epsilon", cfg.epsilon, "stochastic-greedy tolerance")
      ->capture_default_str();
  pre->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  pre->add_option("--metric", metric, "similarity metric")
      ->check(CLI::IsMember({"cosine", "dot", "rbf"}));
  pre->add_option("--kw", cfg.metric.kw, "RBF width multiplier")->capture_default_str();
  pre->add_flag("--force", force, "overwrite a non-empty metadata directory");

  // sample / schedule
  std::string meta;
  std::size_t epoch = 0;
  std::string format = "text";
  std::string schedule_out;
  auto* sample = app.add_subcommand("sample", "print the subset for one epoch");
  sample->add_option("--meta", meta, "metadata directory")->required();
  sample->add_option("--epoch", epoch, "zero-based epoch")->required();
  sample->add_option("--format", format, "text or msub")->check(CLI::IsMember({"text", "msub"}));

  std::string schedule_format = "msub";
  auto* schedule = app.add_subcommand("schedule", "write the subsets of every epoch");
  schedule->add_option("--meta", meta, "metadata directory")->required();
  schedule->add_option("--out", schedule_out, "output file (default: standard output)");
  schedule->add_option("--format", schedule_format, "msub or text")
      ->check(CLI::IsMember({"text", "msub"}));

  // eval / oracle
  KernelInputs eval_in;
  std::string subset_path;
  int precision = 6;
  auto* eval = app.add_subcommand("eval", "evaluate a set function on a subset");
  eval_in.add_to(*eval);
  eval->add_option("--subset", subset_path, "subset file (text or MSUB), global indices")
      ->required();
  eval->add_option("--precision", precision, "significant digits")->check(CLI::Range(1, 17));

  KernelInputs oracle_in;
  std::size_t oracle_k = 0;
  auto* oracle = app.add_subcommand("oracle", "exact optimum by enumeration vs. greedy");
  oracle_in.add_to(*oracle);
  oracle->add_option("--size", oracle_k, "subset size k")->required();
  oracle->add_option("--precision", precision, "significant digits")->check(CLI::Range(1, 17));

  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error[usage]: " << msg << '\n';
    return kUsage;
  }

  try {
    if (pre->parsed()) {
      require_file("--embeddings", embeddings);
      require_file("--labels", labels);
      cfg.metric.metric = parse_metric(metric);
      const DatasetHandle ds = make_dataset(load_embeddings(embeddings), load_labels(labels));
      if (fraction) {
        if (!(*fraction > 0.0 && *fraction <= 1.0)) {
          throw UsageError("usage", "--fraction must lie in (0, 1]");
        }
        cfg.subset_size =
            static_cast<std::size_t>(std::floor(*fraction * static_cast<double>(ds.size())));
      } else if (size) {
        cfg.subset_size = *size;
      } else {
        throw UsageError("usage", "exactly one of --fraction or --size is required");
      }
      std::error_code ec;
      if (fs::exists(out_dir, ec) && !fs::is_empty(out_dir, ec) && !force) {
        throw Error(ErrorCode::kDirectoryNotEmpty,
                    out_dir + " is not empty; pass --force to overwrite");
      }
      BuildStats stats;
      const CurriculumPlan plan = build_plan(ds, cfg, &stats, default_thread_count());
      store_metadata(out_dir, plan, StoreOptions{.force = force});
      out << "[preprocess]\n"
          << "out = " << out_dir << '\n'
          << "n = " << ds.size() << '\n'
          << "c = " << plan.partition.num_classes() << '\n'
          << "k = " << cfg.subset_size << '\n'
          << "T = " << cfg.epochs << '\n'
          << "R = " << cfg.interval << '\n'
          << "sge_epochs = " << cfg.sge_epochs() << '\n'
          << "n_sge = " << plan.family.subsets.size() << '\n'
          << "budgets = " << join(plan.partition.budgets) << '\n'
          << "peak_kernel_entries = " << stats.peak_kernel_entries << '\n'
          << "kernel_seconds = " << stats.kernel_seconds << '\n'
          << "sge_seconds = " << stats.sge_seconds << '\n'
          << "importance_seconds = " << stats.importance_seconds << '\n'
          << "total_seconds = " << stats.total_seconds << '\n';
      return kOk;
    }

    if (sample->parsed()) {
      const CurriculumPlan plan = load_metadata(meta);
      const Subset s = subset_for_epoch(plan, epoch);
      if (format == "msub") {
        write_bytes(out, encode_subset(s));
      } else {
        write_text_subset(out, s);
      }
      return kOk;
    }

    if (schedule->parsed()) {
      const CurriculumPlan plan = load_metadata(meta);
      std::ostringstream buf;
      for (const auto& [t, s] : full_schedule(plan)) {
        if (schedule_format == "msub") {
          ByteWriter w;
          w.u64(t);
          write_bytes(buf, w.bytes());
          write_bytes(buf, encode_subset(s));
        } else {
          buf << "# epoch " << t << '\n';
          write_text_subset(buf, s);
        }
      }
      const std::string data = buf.str();
      if (schedule_out.empty()) {
        out << data;
      } else {
        write_file(schedule_out,
                   std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
      }
      return kOk;
    }

    if (eval->parsed()) {
      const SetFunctionKind kind = eval_in.kind();
      const SimilarityKernel k = eval_in.build();
      const auto local = to_local(k, read_subset_file(subset_path));
      out << std::setprecision(precision) << evaluate(kind, k, local) << '\n';
      return kOk;
    }

    if (oracle->parsed()) {
      const SetFunctionKind kind = oracle_in.kind();
      const SimilarityKernel k = oracle_in.build();
      const BruteForceResult best = brute_force_opt(kind, k, oracle_k);
      const GreedyResult greedy = naive_greedy(kind, k, oracle_k);
      std::vector<GlobalIndex> opt_global, greedy_global;
      for (LocalIndex e : best.subset) opt_global.push_back(k.indices()[e]);
      for (LocalIndex e : greedy.selected) greedy_global.push_back(k.indices()[e]);
      std::sort(greedy_global.begin(), greedy_global.end());
      const double ratio = best.value != 0.0 ? greedy.final_value / best.value : 1.0;
      out << std::setprecision(precision) << "optimum = " << best.value << '\n'
          << "optimum_subset = " << join_indices(opt_global) << '\n'
          << "greedy = " << greedy.final_value << '\n'
          << "greedy_subset = " << join_indices(greedy_global) << '\n'
          << "ratio = " << ratio << '\n';
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error[" << e.code << "]: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error[" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

}  // namespace milo::cli
