#include "milo/curriculum.hpp"

#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"

namespace milo {
namespace {

using testing::error_code_of;

CurriculumConfig config(std::size_t epochs, std::size_t interval, double kappa, std::size_t k,
                        std::uint64_t seed = 1) {
  CurriculumConfig cfg;
  cfg.epochs = epochs;
  cfg.interval = interval;
  cfg.kappa = kappa;
  cfg.subset_size = k;
  cfg.seed = seed;
  return cfg;
}

TEST(CurriculumConfig, PhaseCounts) {
  EXPECT_EQ(config(24, 4, kDefaultKappa, 1).sge_epochs(), 4u);
  EXPECT_EQ(config(24, 4, kDefaultKappa, 1).sge_subset_count(), 1u);
  EXPECT_EQ(config(200, 1, kDefaultKappa, 1).sge_epochs(), 33u);
  EXPECT_EQ(config(200, 1, kDefaultKappa, 1).sge_subset_count(), 33u);
  EXPECT_EQ(config(200, 1, 0.0, 1).sge_epochs(), 0u);
  EXPECT_EQ(config(200, 1, 0.0, 1).sge_subset_count(), 0u);
  EXPECT_EQ(config(10, 3, 1.0, 1).sge_subset_count(), 4u);
}

TEST(CurriculumConfig, Defaults) {
  const CurriculumConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.kappa, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(cfg.epsilon, 0.01);
  EXPECT_EQ(cfg.interval, 1u);
  EXPECT_DOUBLE_EQ(cfg.lambda, 0.4);
  EXPECT_EQ(cfg.metric.metric, Metric::kCosine);
}

TEST(CurriculumConfig, Validation) {
  EXPECT_NO_THROW(config(10, 1, 0.5, 3).validate());
  EXPECT_EQ(error_code_of([] { config(0, 1, 0.5, 3).validate(); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(error_code_of([] { config(10, 0, 0.5, 3).validate(); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(error_code_of([] { config(10, 1, 1.5, 3).validate(); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(error_code_of([] { config(10, 1, -0.1, 3).validate(); }), ErrorCode::kInvalidConfig);
  auto bad_eps = config(10, 1, 0.5, 3);
  bad_eps.epsilon = 0.0;
  EXPECT_EQ(error_code_of([&] { bad_eps.validate(); }), ErrorCode::kInvalidEpsilon);
}

TEST(BuildPlan, TraceForTwentyFourEpochs) {
  RngStream rng(1, 0);
  const DatasetHandle ds = testing::clustered_dataset(rng, 3, 20);
  const CurriculumPlan plan = build_plan(ds, config(24, 4, kDefaultKappa, 12));
  ASSERT_EQ(plan.family.subsets.size(), 1u);
  for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(subset_for_epoch(plan, t), plan.family.subsets[0]);
  for (std::size_t t = 4; t < 24; ++t) {
    const std::size_t phase = (t - 4) / 4;
    EXPECT_EQ(subset_for_epoch(plan, t),
              sample_wre_subset(plan.distribution, plan.partition.budgets, 1, phase));
    EXPECT_EQ(subset_for_epoch(plan, t), subset_for_epoch(plan, 4 + 4 * phase));
  }
  EXPECT_EQ(error_code_of([&] { subset_for_epoch(plan, 24); }), ErrorCode::kEpochOutOfRange);

  const auto schedule = full_schedule(plan);
  ASSERT_EQ(schedule.size(), 24u);
  for (std::size_t t = 0; t < 24; ++t) {
    EXPECT_EQ(schedule[t].first, t);
    EXPECT_EQ(schedule[t].second, subset_for_epoch(plan, t));
    EXPECT_EQ(schedule[t].second.size(), 12u);
  }
}

TEST(BuildPlan, SingleWindowFullSge) {
  RngStream rng(2, 0);
  const DatasetHandle ds = testing::clustered_dataset(rng, 2, 15);
  const CurriculumPlan plan = build_plan(ds, config(6, 6, 1.0, 6));
  ASSERT_EQ(plan.family.subsets.size(), 1u);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(subset_for_epoch(plan, t), plan.family.subsets[0]);
}

TEST(BuildPlan, KappaZeroIsPureWre) {
  RngStream rng(3, 0);
  const DatasetHandle ds = testing::clustered_dataset(rng, 2, 15);
  const CurriculumPlan plan = build_plan(ds, config(5, 1, 0.0, 6));
  EXPECT_TRUE(plan.family.subsets.empty());
  EXPECT_EQ(subset_for_epoch(plan, 0),
            sample_wre_subset(plan.distribution, plan.partition.budgets, 1, 0));
}

TEST(BuildPlan, SingleEpochSchedule) {
  RngStream rng(4, 0);
  const DatasetHandle ds = testing::clustered_dataset(rng, 2, 5);
  EXPECT_EQ(full_schedule(build_plan(ds, config(1, 1, kDefaultKappa, 2))).size(), 1u);
}

TEST(BuildPlan, IndependentOfThreadCount) {
  RngStream rng(5, 0);
  const DatasetHandle ds = testing::clustered_dataset(rng, 5, 30);
  const CurriculumConfig cfg = config(12, 2, 0.5, 30, 17);
  const CurriculumPlan one = build_plan(ds, cfg, nullptr, 1);
  EXPECT_EQ(one, build_plan(ds, cfg, nullptr, 3));
  EXPECT_EQ(one, build_plan(ds, cfg, nullptr, 8));
  EXPECT_EQ(full_schedule(one), full_schedule(build_plan(ds, cfg, nullptr, 4)));
}

TEST(BuildPlan, StatsTrackLargestClassKernel) {
  RngStream rng(6, 0);
  std::vector<float> v;
  std::vector<ClassId> labels{0, 0, 0, 0, 1, 1, 2, 2, 2};
  const EmbeddingMatrix e = testing::random_embeddings(rng, labels.size(), 4);
  BuildStats stats;
  build_plan(make_dataset(e, LabelVector(labels)), config(4, 1, 0.5, 3), &stats, 1);
  EXPECT_EQ(stats.peak_kernel_entries, 16u);
  EXPECT_GE(stats.total_seconds, 0.0);
}

TEST(BuildPlan, WreCoversMoreThanSge) {
  RngStream rng(7, 0);
  const DatasetHandle ds = testing::clustered_dataset(rng, 4, 50);
  const CurriculumPlan plan = build_plan(ds, config(60, 1, kDefaultKappa, 20, 3));
  std::set<GlobalIndex> sge, all;
  for (std::size_t t = 0; t < plan.config.sge_epochs(); ++t) {
    const Subset s = subset_for_epoch(plan, t);
    sge.insert(s.begin(), s.end());
  }
  for (const auto& [t, s] : full_schedule(plan)) all.insert(s.begin(), s.end());
  EXPECT_GT(all.size(), sge.size());
}

TEST(BuildPlan, BudgetExceedsDataset) {
  RngStream rng(8, 0);
  const DatasetHandle ds = testing::clustered_dataset(rng, 2, 3);
  EXPECT_EQ(error_code_of([&] { build_plan(ds, config(4, 1, 0.5, 7)); }),
            ErrorCode::kBudgetExceedsDataset);
}

}  // namespace
}  // namespace milo
