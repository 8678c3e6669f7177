// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "milo/curriculum.hpp"
#include "milo/exploration.hpp"
#include "milo/greedy.hpp"
#include "milo/metadata.hpp"
#include "test_support.hpp"

namespace milo {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_seconds;  // 0 = none
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const double kOneMinusInvE = 1.0 - 1.0 / std::numbers::e;

std::vector<SimilarityKernel> twelve_element_kernels() {
  std::vector<SimilarityKernel> out;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream rng(1000 + i, stream_id(StreamDomain::kTest, 1, 0));
    out.push_back(testing::random_cosine_kernel(rng, 12));
  }
  return out;
}

// Worst greedy/OPT ratio and number of instances below `bound`.
Outcome ratio_check(const SetFunctionKind& kind, double bound) {
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const SimilarityKernel& k : twelve_element_kernels()) {
    const double opt = brute_force_opt(kind, k, 4).value;
    const double greedy = naive_greedy(kind, k, 4).final_value;
    if (greedy < bound * opt - 1e-12) ++violations;
    if (opt > 0) worst = std::min(worst, greedy / opt);
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = std::string(set_function_name(kind.type)) + " worst ratio " + fmt("%.4f", worst) +
             " bound " + fmt("%.4f", bound) + " violations " + std::to_string(violations);
  return o;
}

Outcome merge(const std::vector<Outcome>& parts) {
  Outcome o;
  for (const Outcome& p : parts) {
    o.pass = o.pass && p.pass;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += p.detail;
  }
  return o;
}

Outcome greedy_approximation() {
  const double b = kOneMinusInvE;
  return merge({ratio_check(SetFunctionKind::facility_location(), b),
                ratio_check(SetFunctionKind::graph_cut(0.4), b)});
}

Outcome disparity_ratios() {
  return merge({ratio_check(SetFunctionKind::disparity_min(), 0.25),
                ratio_check(SetFunctionKind::disparity_sum(), 0.5)});
}

Outcome mean_check(const std::string& label, const std::vector<double>& values, double bound) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  Outcome o;
  o.pass = mean >= bound - 3 * se;
  o.detail = label + " mean " + fmt("%.4f", mean) + " bound " + fmt("%.4f", bound) + " se " +
             fmt("%.2g", se);
  return o;
}

Outcome stochastic_greedy_quality() {
  const double eps = 0.01;
  const double factor = kOneMinusInvE - eps;
  std::vector<Outcome> parts;
  RngStream gen(7, stream_id(StreamDomain::kTest, 2, 0));
  const SimilarityKernel big = testing::random_cosine_kernel(gen, 200, 10);
  for (const auto& kind : {SetFunctionKind::graph_cut(0.4), SetFunctionKind::facility_location()}) {
    const double proxy = naive_greedy(kind, big, 20).final_value;
    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      RngStream rng(seed, stream_id(StreamDomain::kStochasticGreedy, 0, 0));
      values.push_back(stochastic_greedy(kind, big, 20, eps, rng).final_value);
    }
    parts.push_back(mean_check(std::string(set_function_name(kind.type)) + " m=200 vs greedy",
                               values, factor * proxy));
  }
  for (const auto& kind : {SetFunctionKind::graph_cut(0.4), SetFunctionKind::facility_location()}) {
    std::vector<double> ratios;
    std::uint64_t seed = 0;
    for (const SimilarityKernel& k : twelve_element_kernels()) {
      const double opt = brute_force_opt(kind, k, 4).value;
      RngStream rng(seed++, stream_id(StreamDomain::kStochasticGreedy, 0, 0));
      ratios.push_back(stochastic_greedy(kind, k, 4, eps, rng).final_value / opt);
    }
    parts.push_back(mean_check(std::string(set_function_name(kind.type)) + " m=12 ratio vs OPT",
                               ratios, factor));
  }
  return merge(parts);
}

Outcome submodularity() {
  RngStream rng(11, stream_id(StreamDomain::kTest, 3, 0));
  int gain_violations = 0, monotone_violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t m = 4 + rng.below(17);
    const SimilarityKernel k = testing::random_cosine_kernel(rng, m);
    std::vector<LocalIndex> perm(m);
    std::iota(perm.begin(), perm.end(), LocalIndex{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t b = 1 + rng.below(m - 1);
    const std::size_t a = rng.below(b);  // A strictly inside B
    const LocalIndex x = perm[b + rng.below(m - b)];
    for (const auto& kind : {SetFunctionKind::facility_location(), SetFunctionKind::graph_cut(0.4)}) {
      std::vector<LocalIndex> sa(perm.begin(), perm.begin() + a), sb(perm.begin(), perm.begin() + b);
      // From-scratch gains, independent of the incremental state.
      const double ga = [&] {
        auto s = sa;
        s.push_back(x);
        return evaluate(kind, k, s) - evaluate(kind, k, sa);
      }();
      const double gb = [&] {
        auto s = sb;
        s.push_back(x);
        return evaluate(kind, k, s) - evaluate(kind, k, sb);
      }();
      worst = std::max(worst, gb - ga);
      if (gb - ga > 1e-6) ++gain_violations;
      if (kind.type == SetFunctionType::kFacilityLocation && (ga < -1e-9 || gb < -1e-9))
        ++monotone_violations;
    }
  }
  Outcome o;
  o.pass = gain_violations == 0 && monotone_violations == 0;
  o.detail = "10000 triples x {fl, gc}: diminishing-returns violations " +
             std::to_string(gain_violations) + " (max excess " + fmt("%.2g", worst) +
             "), fl negative gains " + std::to_string(monotone_violations);
  return o;
}

Outcome incremental_equivalence() {
  RngStream rng(12, stream_id(StreamDomain::kTest, 4, 0));
  const SetFunctionKind kinds[] = {SetFunctionKind::facility_location(), SetFunctionKind::graph_cut(0.4),
                                   SetFunctionKind::disparity_sum(), SetFunctionKind::disparity_min()};
  double worst = 0.0;
  long checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + rng.below(24);
    const SimilarityKernel k = testing::random_cosine_kernel(rng, m);
    std::vector<LocalIndex> seq(m);
    std::iota(seq.begin(), seq.end(), LocalIndex{0});
    std::shuffle(seq.begin(), seq.end(), rng);
    seq.resize(1 + rng.below(m));
    for (const auto& kind : kinds) {
      GainState state(kind, k);
      std::vector<LocalIndex> prefix;
      double prev = 0.0;
      for (LocalIndex e : seq) {
        const double gain = state.marginal_gain(e);
        state.commit(e);
        prefix.push_back(e);
        const double value = evaluate(kind, k, prefix);
        const double scale = std::max({1.0, std::abs(value), std::abs(prev)});
        worst = std::max({worst, std::abs(gain - (value - prev)) / scale,
                          std::abs(state.value() - value) / scale});
        prev = value;
        ++checks;
      }
    }
  }
  Outcome o;
  o.pass = worst <= 1e-6;
  o.detail = std::to_string(checks) + " steps, max relative error " + fmt("%.2g", worst);
  return o;
}

Outcome taylor_softmax_properties() {
  RngStream rng(13, stream_id(StreamDomain::kTest, 5, 0));
  int failures = 0;
  double worst_sum = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> g(1 + rng.below(50));
    for (double& x : g) x = -1.0 + 10.0 * rng.uniform_open01() * rng.uniform_open01();
    const auto p = taylor_softmax(g);
    double sum = 0.0;
    bool ok = true;
    for (double v : p) {
      ok = ok && v > 0.0;
      sum += v;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    ok = ok && std::abs(sum - 1.0) <= 1e-9;
    for (std::size_t i = 0; ok && i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        if (g[i] > g[j] && p[i] < p[j]) ok = false;
    failures += !ok;
  }
  const std::vector<double> worked{1.0, 0.0};
  const auto p = taylor_softmax(worked);
  const bool worked_ok = std::round(p[0] * 1e6) == 714286 && std::round(p[1] * 1e6) == 285714;
  Outcome o;
  o.pass = failures == 0 && worked_ok;
  o.detail = "10000 vectors, failures " + std::to_string(failures) + ", max |sum-1| " +
             fmt("%.2g", worst_sum) + ", g=[1,0] -> [" + fmt("%.6f", p[0]) + ", " +
             fmt("%.6f", p[1]) + "]";
  return o;
}

// Inclusion probabilities of successive weighted draws without replacement,
// by enumerating every ordered draw sequence of length k.
std::vector<double> exact_inclusion(const std::vector<double>& p, std::size_t k) {
  std::vector<double> incl(p.size(), 0.0);
  std::vector<bool> used(p.size(), false);
  std::vector<std::size_t> path;
  std::function<void(double, double)> rec = [&](double prob, double remaining) {
    if (path.size() == k) {
      for (std::size_t i : path) incl[i] += prob;
      return;
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      path.push_back(i);
      rec(prob * p[i] / remaining, remaining - p[i]);
      path.pop_back();
      used[i] = false;
    }
  };
  rec(1.0, std::accumulate(p.begin(), p.end(), 0.0));
  return incl;
}

Outcome wre_sampler() {
  const std::vector<double> p{0.5, 0.25, 0.25};
  const std::size_t k = 2;
  const auto exact = exact_inclusion(p, k);
  const int draws = 200000;
  std::vector<int> counts(p.size(), 0);
  int malformed = 0;
  for (int i = 0; i < draws; ++i) {
    RngStream rng(i, stream_id(StreamDomain::kWeightedExploration, 0, 0));
    const auto s = weighted_sample_without_replacement(p, k, rng);
    const std::set<LocalIndex> distinct(s.begin(), s.end());
    if (s.size() != k || distinct.size() != k || *distinct.rbegin() >= p.size()) ++malformed;
    for (LocalIndex e : s)
      if (e < p.size()) ++counts[e];
  }
  Outcome o;
  o.pass = malformed == 0;
  std::ostringstream d;
  d << "draws " << draws << ", malformed " << malformed;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double freq = counts[i] / static_cast<double>(draws);
    const double sigma = std::sqrt(exact[i] * (1 - exact[i]) / draws);
    const double z = (freq - exact[i]) / sigma;
    o.pass = o.pass && std::abs(z) <= 3.0;
    d << ", p" << i << " " << fmt("%.5f", freq) << " vs " << fmt("%.5f", exact[i]) << " (z "
      << fmt("%+.2f", z) << ")";
  }
  o.detail = d.str();
  return o;
}

CurriculumConfig config(std::size_t epochs, std::size_t interval, double kappa, std::size_t k,
                        std::uint64_t seed) {
  CurriculumConfig cfg;
  cfg.epochs = epochs;
  cfg.interval = interval;
  cfg.kappa = kappa;
  cfg.subset_size = k;
  cfg.seed = seed;
  return cfg;
}

Outcome curriculum_trace() {
  RngStream rng(14, stream_id(StreamDomain::kTest, 6, 0));
  const DatasetHandle ds = testing::clustered_dataset(rng, 4, 40);
  const CurriculumPlan plan = build_plan(ds, config(24, 4, kDefaultKappa, 16, 5));
  bool ok = plan.family.subsets.size() == 1 && plan.config.sge_epochs() == 4;
  for (std::size_t t = 0; t < 4; ++t) ok = ok && subset_for_epoch(plan, t) == plan.family.subsets[0];
  std::vector<std::size_t> refreshes;
  std::uint64_t last_phase = ~0ULL;
  for (std::size_t t = 4; t < 24; ++t) {
    const std::uint64_t phase = (t - 4) / 4;
    ok = ok && subset_for_epoch(plan, t) ==
                   sample_wre_subset(plan.distribution, plan.partition.budgets, 5, phase);
    if (phase != last_phase) refreshes.push_back(t);
    last_phase = phase;
  }
  ok = ok && refreshes == std::vector<std::size_t>{4, 8, 12, 16, 20};
  std::set<Subset> wre_draws;
  for (std::size_t t : refreshes) wre_draws.insert(subset_for_epoch(plan, t));

  const CurriculumConfig long_run = config(200, 1, kDefaultKappa, 1, 0);
  ok = ok && long_run.sge_epochs() == 33 && long_run.sge_subset_count() == 33;

  const CurriculumConfig defaults;
  ok = ok && defaults.kappa == 1.0 / 6.0 && defaults.lambda == 0.4 && defaults.epsilon == 0.01 &&
       defaults.interval == 1;

  Outcome o;
  o.pass = ok;
  o.detail = "T=24 R=4: sge subsets " + std::to_string(plan.family.subsets.size()) +
             ", WRE refresh epochs 4,8,12,16,20 (" + std::to_string(wre_draws.size()) +
             " distinct draws); T=200 R=1: sge_epochs " + std::to_string(long_run.sge_epochs()) +
             " n_sge " + std::to_string(long_run.sge_subset_count()) +
             "; defaults kappa=1/6 lambda=0.4 eps=0.01 R=1";
  return o;
}

Outcome classwise_memory() {
  RngStream rng(15, stream_id(StreamDomain::kTest, 7, 0));
  const DatasetHandle ds = testing::clustered_dataset(rng, 10, 100, 16);
  BuildStats stats;
  build_plan(ds, config(10, 1, kDefaultKappa, 100, 1), &stats, 1);
  Outcome o;
  o.pass = stats.peak_kernel_entries == 10000 && peak_kernel_entries(partition_by_class(ds.labels, 100)) == 10000;
  o.detail = "m=1000 c=10: peak kernel entries " + std::to_string(stats.peak_kernel_entries) +
             " (global kernel would hold 1000000)";
  return o;
}

std::vector<std::pair<std::string, Bytes>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, Bytes>> files;
  for (const auto& e : fs::directory_iterator(dir)) files.emplace_back(e.path().filename(), read_file(e.path()));
  std::sort(files.begin(), files.end());
  return files;
}

Outcome persistence() {
  RngStream rng(16, stream_id(StreamDomain::kTest, 8, 0));
  testing::TempDir tmp;
  int round_trip_failures = 0, bytes_failures = 0, corruptions = 0, detected = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t classes = 1 + rng.below(5);
    const std::size_t per_class = 2 + rng.below(20);
    const DatasetHandle ds = testing::clustered_dataset(rng, classes, per_class, 1 + rng.below(6));
    const std::size_t epochs = 1 + rng.below(30);
    CurriculumConfig cfg = config(epochs, 1 + rng.below(std::min<std::size_t>(epochs, 5)),
                                  rng.uniform_open01(), 1 + rng.below(ds.size()), rng.next_u64());
    cfg.metric.metric = static_cast<Metric>(rng.below(3));
    cfg.lambda = rng.uniform_open01();
    const CurriculumPlan plan = build_plan(ds, cfg);
    const fs::path a = tmp / ("a" + std::to_string(i));
    const fs::path b = tmp / ("b" + std::to_string(i));
    store_metadata(a, plan);
    const CurriculumPlan loaded = load_metadata(a);
    if (!(loaded == plan) || full_schedule(loaded) != full_schedule(plan)) ++round_trip_failures;
    store_metadata(b, loaded);
    const auto files = snapshot(a);
    if (files != snapshot(b)) ++bytes_failures;
    // Flip one random bit in every payload file, one at a time.
    for (const auto& [name, bytes] : files) {
      if (name == kManifestName) continue;
      Bytes bad = bytes;
      bad[rng.below(bad.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
      write_file(b / name, bad);
      ++corruptions;
      try {
        load_metadata(b);
      } catch (const Error&) {
        ++detected;
      }
      write_file(b / name, bytes);
    }
  }
  Outcome o;
  o.pass = round_trip_failures == 0 && bytes_failures == 0 && corruptions > 0 && detected == corruptions;
  o.detail = "100 plans: round-trip failures " + std::to_string(round_trip_failures) +
             ", re-serialization diffs " + std::to_string(bytes_failures) + ", corruptions detected " +
             std::to_string(detected) + "/" + std::to_string(corruptions);
  return o;
}

int cli(std::vector<std::string> args, std::string* out) {
  args.insert(args.begin(), "milo");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  return code;
}

Outcome end_to_end_determinism() {
  RngStream rng(17, stream_id(StreamDomain::kTest, 9, 0));
  const DatasetHandle ds = testing::clustered_dataset(rng, 5, 100, 12);
  testing::TempDir tmp;
  write_embeddings(tmp / "e.memb", ds.embeddings);
  write_labels(tmp / "l.mlbl", ds.labels);
  auto schedule = [&](const std::string& tag, const std::string& seed) {
    const std::string meta = (tmp / ("meta-" + tag)).string();
    std::string out;
    const int pre = cli({"preprocess", "--embeddings", (tmp / "e.memb").string(), "--labels",
                         (tmp / "l.mlbl").string(), "--out", meta, "--fraction", "0.1", "--epochs",
                         "30", "--r", "2", "--seed", seed},
                        nullptr);
    const int sch = cli({"schedule", "--meta", meta, "--format", "msub"}, &out);
    return pre == 0 && sch == 0 ? out : std::string();
  };
  const std::string first = schedule("a", "7");
  const std::string second = schedule("b", "7");
  const std::string other = schedule("c", "8");

  const CurriculumPlan p7 = load_metadata(tmp / "meta-a");
  const CurriculumPlan p8 = load_metadata(tmp / "meta-c");
  int differing = 0;
  for (std::size_t t = p7.config.sge_epochs(); t < p7.config.epochs; ++t)
    differing += subset_for_epoch(p7, t) != subset_for_epoch(p8, t);

  Outcome o;
  o.pass = !first.empty() && first == second && !other.empty() && differing >= 1;
  o.detail = "n=500: same-seed schedules " + std::string(first == second ? "identical" : "differ") +
             " (" + std::to_string(first.size()) + " bytes); seed 7 vs 8 differing WRE epochs " +
             std::to_string(differing);
  return o;
}

Outcome sge_quality() {
  const SetFunctionKind gc = SetFunctionKind::graph_cut(0.4);
  double sge_total = 0.0, random_total = 0.0;
  int wins = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngStream rng(2000 + i, stream_id(StreamDomain::kTest, 10, 0));
    const std::size_t m = 40 + rng.below(61);
    const std::size_t k = std::max<std::size_t>(1, m / 10);
    const SimilarityKernel kernel = testing::random_cosine_kernel(rng, m, 8);
    RngStream sg(i, stream_id(StreamDomain::kStochasticGreedy, 0, 0));
    const double sge = stochastic_greedy(gc, kernel, k, 0.01, sg).final_value;
    double rand_mean = 0.0;
    for (int r = 0; r < 20; ++r) {
      std::vector<LocalIndex> perm(m);
      std::iota(perm.begin(), perm.end(), LocalIndex{0});
      for (std::size_t j = 0; j < k; ++j) std::swap(perm[j], perm[j + rng.below(m - j)]);
      perm.resize(k);
      rand_mean += evaluate(gc, kernel, perm) / 20.0;
    }
    sge_total += sge;
    random_total += rand_mean;
    wins += sge > rand_mean;
  }
  Outcome o;
  o.pass = sge_total > random_total;
  o.detail = "100 kernels: mean gc(SGE) " + fmt("%.4f", sge_total / 100) + " vs random " +
             fmt("%.4f", random_total / 100) + ", SGE ahead on " + std::to_string(wins) + "/100";
  return o;
}

}  // namespace
}  // namespace milo

int main() {
  using namespace milo;
  const std::vector<Criterion> criteria = {
      {"greedy_approximation", 30, greedy_approximation},
      {"disparity_ratios", 60, disparity_ratios},
      {"stochastic_greedy", 120, stochastic_greedy_quality},
      {"submodularity_monotonicity", 0, submodularity},
      {"incremental_gain_equivalence", 0, incremental_equivalence},
      {"taylor_softmax", 0, taylor_softmax_properties},
      {"wre_sampler", 0, wre_sampler},
      {"curriculum_trace", 0, curriculum_trace},
      {"classwise_memory", 0, classwise_memory},
      {"persistence", 0, persistence},
      {"end_to_end_determinism", 0, end_to_end_determinism},
      {"sge_quality", 0, sge_quality},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_seconds > 0 && secs >= c.time_limit_seconds) {
      o.pass = false;
      o.detail += "; exceeded time limit";
    }
    failed += !o.pass;
    std::printf("%s  %-30s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
