#include <gtest/gtest.h>

#include "recbench/runner/bench.hpp"

using namespace recbench;

TEST(Bench, BothPathsProduceTheSameReport) {
  BenchOptions o;
  o.users = 300;
  o.items = 500;
  o.repeats = 2;
  o.batch_size = 64;
  const auto r = bench_eval(o);
  EXPECT_TRUE(r.identical);
  EXPECT_EQ(r.accelerated_report, r.naive_report);
  EXPECT_NE(r.accelerated_report.find("ndcg@10"), std::string::npos);
  EXPECT_GT(r.accelerated_seconds, 0.0);
  EXPECT_GT(r.naive_seconds, 0.0);
  EXPECT_NEAR(r.speedup, r.naive_seconds / r.accelerated_seconds, 1e-9 * r.speedup);
  const auto text = format_bench(o, r);
  EXPECT_NE(text.find("identical"), std::string::npos);
}

TEST(Bench, SeedControlsTheScores) {
  BenchOptions o;
  o.users = 50;
  o.items = 80;
  o.repeats = 1;
  const auto a = bench_eval(o);
  const auto b = bench_eval(o);
  EXPECT_EQ(a.accelerated_report, b.accelerated_report);
  o.seed = 1;
  EXPECT_NE(bench_eval(o).accelerated_report, a.accelerated_report);
}
