#include "milo/curriculum.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "milo/error.hpp"

namespace milo {

void CurriculumConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be >= 1");
  if (interval < 1 || interval > epochs) {
    throw Error(ErrorCode::kInvalidConfig, "selection interval R must satisfy 1 <= R <= T (R=" +
                                               std::to_string(interval) +
                                               ", T=" + std::to_string(epochs) + ")");
  }
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "kappa must lie in [0, 1]");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidConfig, "lambda must be finite and >= 0");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidEpsilon, "epsilon must lie in (0, 1)");
  }
  metric.validate();
}

std::size_t CurriculumConfig::sge_epochs() const noexcept {
  const double raw = std::floor(kappa * static_cast<double>(epochs) + 1e-9);
  return std::min(epochs, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::size_t CurriculumConfig::sge_subset_count() const noexcept {
  return (sge_epochs() + interval - 1) / interval;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("MILO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct ClassOutput {
  std::vector<Subset> sge;
  ClassDistribution distribution;
  KernelScaling scaling;
};

}  // namespace

CurriculumPlan build_plan(const DatasetHandle& ds, const CurriculumConfig& cfg, BuildStats* stats,
                          unsigned threads) {
  const auto start = Clock::now();
  cfg.validate();
  CurriculumPlan plan;
  plan.config = cfg;
  plan.dataset_size = ds.size();
  plan.partition = partition_by_class(ds.labels, cfg.subset_size);

  const std::size_t classes = plan.partition.num_classes();
  const std::size_t n_sge = cfg.sge_subset_count();
  const SetFunctionKind graph_cut = SetFunctionKind::graph_cut(cfg.lambda);
  const SetFunctionKind disparity_min = SetFunctionKind::disparity_min();

  std::vector<ClassOutput> outputs(classes);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> live_entries{0};
  std::mutex mu;  // guards local_stats and failure
  BuildStats local_stats;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= classes) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        auto t0 = Clock::now();
        const SimilarityKernel kernel =
            build_kernel(ds.embeddings, plan.partition.members[c], cfg.metric);
        const std::size_t live = live_entries.fetch_add(kernel.entry_count()) + kernel.entry_count();
        const double kernel_s = seconds_since(t0);

        t0 = Clock::now();
        ClassOutput& out = outputs[c];
        out.sge = sge_class_subsets(graph_cut, kernel, static_cast<ClassId>(c),
                                    plan.partition.budgets[c], n_sge, cfg.epsilon, cfg.seed);
        const double sge_s = seconds_since(t0);

        t0 = Clock::now();
        out.distribution = class_distribution(disparity_min, kernel);
        out.scaling = kernel.scaling();
        const double imp_s = seconds_since(t0);

        live_entries.fetch_sub(kernel.entry_count());
        std::lock_guard lock(mu);
        local_stats.peak_kernel_entries = std::max(local_stats.peak_kernel_entries, live);
        local_stats.kernel_seconds += kernel_s;
        local_stats.sge_seconds += sge_s;
        local_stats.importance_seconds += imp_s;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, classes));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  plan.family.epsilon = cfg.epsilon;
  plan.family.seed = cfg.seed;
  plan.family.subsets.assign(n_sge, {});
  plan.distribution.classes.reserve(classes);
  plan.kernel_scaling.reserve(classes);
  for (ClassOutput& out : outputs) {
    for (std::size_t i = 0; i < n_sge; ++i) {
      plan.family.subsets[i].insert(plan.family.subsets[i].end(), out.sge[i].begin(),
                                    out.sge[i].end());
    }
    plan.distribution.classes.push_back(std::move(out.distribution));
    plan.kernel_scaling.push_back(out.scaling);
  }
  for (Subset& s : plan.family.subsets) std::sort(s.begin(), s.end());

  if (stats) {
    *stats = local_stats;
    stats->total_seconds = seconds_since(start);
  }
  return plan;
}

Subset subset_for_epoch(const CurriculumPlan& plan, std::size_t epoch) {
  const CurriculumConfig& cfg = plan.config;
  if (epoch >= cfg.epochs) {
    throw Error(ErrorCode::kEpochOutOfRange, "epoch " + std::to_string(epoch) +
                                                 " outside schedule of " +
                                                 std::to_string(cfg.epochs) + " epochs");
  }
  const std::size_t sge_epochs = cfg.sge_epochs();
  if (epoch < sge_epochs) return plan.family.subsets.at(epoch / cfg.interval);
  const std::size_t phase = (epoch - sge_epochs) / cfg.interval;
  return sample_wre_subset(plan.distribution, plan.partition.budgets, cfg.seed, phase);
}

std::vector<std::pair<std::size_t, Subset>> full_schedule(const CurriculumPlan& plan) {
  const std::size_t sge_epochs = plan.config.sge_epochs();
  const std::size_t r = plan.config.interval;
  // (phase, window) identifies the subset an epoch trains on.
  auto window = [&](std::size_t t) {
    return t < sge_epochs ? std::pair{0, t / r} : std::pair{1, (t - sge_epochs) / r};
  };
  std::vector<std::pair<std::size_t, Subset>> out;
  out.reserve(plan.config.epochs);
  for (std::size_t t = 0; t < plan.config.epochs; ++t) {
    if (t > 0 && window(t) == window(t - 1)) {
      out.emplace_back(t, out.back().second);
    } else {
      out.emplace_back(t, subset_for_epoch(plan, t));
    }
  }
  return out;
}

}  // namespace milo
