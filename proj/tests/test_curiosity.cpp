#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "amphim/curiosity/hashing.hpp"

using namespace amphim::curiosity;

namespace {

Eigen::VectorXd randv(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST(Hash, DeterministicAndLocal) {
  const SimHasher h(kFeatureDim, 32, 7);
  std::mt19937_64 rng(1);
  int same = 0;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd s = randv(kFeatureDim, rng);
    ASSERT_EQ(h.hash(s), h.hash(s));
    same += h.hash(s) == h.hash((s.array() + 1e-12).matrix());
  }
  EXPECT_GE(same, 9900);
}

TEST(Hash, NegatedProjectionComplementsCode) {
  const SimHasher h(kFeatureDim, 32, 9);
  const SimHasher neg(Eigen::MatrixXd(-h.projection()));
  std::mt19937_64 rng(2);
  const HashCode mask = (HashCode{1} << 32) - 1;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd s = randv(kFeatureDim, rng);
    EXPECT_EQ(neg.hash(s), ~h.hash(s) & mask);
  }
}

TEST(Hash, DimensionMismatchThrows) {
  const SimHasher h(kFeatureDim, 16, 1);
  EXPECT_THROW(h.hash(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Counts, ObserveAndReward) {
  CountTable t;
  EXPECT_EQ(t.observe(5), 1u);
  for (int i = 0; i < 3; ++i) t.observe(5);
  EXPECT_EQ(t.count(5), 4u);
  EXPECT_EQ(t.observe(9), 1u);
  EXPECT_EQ(t.observe(5), 5u);
  EXPECT_EQ(t.observe(9), 2u);
  EXPECT_EQ(t.total(), 7u);
  EXPECT_EQ(curiosity_reward(1), 1.0);
  EXPECT_EQ(curiosity_reward(4), 0.5);
  EXPECT_EQ(curiosity_reward(100), 0.1);
  EXPECT_THROW(curiosity_reward(0), std::invalid_argument);
  for (std::uint64_t n = 1; n < 1000; ++n) {
    ASSERT_LT(curiosity_reward(n + 1), curiosity_reward(n));
    ASSERT_GT(curiosity_reward(n), 0.0);
  }
}

TEST(Counts, ScriptedSequenceMatchesBruteForce) {
  const SimHasher h(kFeatureDim, 8, 3);  // few bits so codes repeat often
  std::mt19937_64 rng(4);
  std::vector<Eigen::VectorXd> states;
  for (int i = 0; i < 1000; ++i) states.push_back(randv(kFeatureDim, rng));
  CountTable t;
  std::vector<HashCode> seen;
  for (const auto& s : states) {
    const HashCode c = h.hash(s);
    const double r = curiosity_reward(t.observe(c));
    seen.push_back(c);
    const auto brute = static_cast<std::uint64_t>(std::count(seen.begin(), seen.end(), c));
    ASSERT_EQ(r, 1.0 / std::sqrt(static_cast<double>(brute)));
  }
}

TEST(Counts, ShardMergeConservesCounts) {
  const SimHasher h(kFeatureDim, 10, 5);
  std::mt19937_64 rng(6);
  std::vector<Eigen::VectorXd> states;
  for (int i = 0; i < 8000; ++i) states.push_back(randv(kFeatureDim, rng));
  std::vector<CountTable> shards(8);
#pragma omp parallel for num_threads(8) schedule(static)
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    shards[static_cast<std::size_t>(omp_get_thread_num())].observe(h.hash(states[static_cast<std::size_t>(i)]));
  }
  CountTable merged, serial;
  std::uint64_t shard_total = 0;
  for (const auto& s : shards) {
    merged.merge(s);
    shard_total += s.total();
  }
  for (const auto& s : states) serial.observe(h.hash(s));
  EXPECT_EQ(shard_total, states.size());
  EXPECT_EQ(merged.total(), states.size());
  EXPECT_EQ(merged.counts(), serial.counts());
}

TEST(Module, WarmupThenCount) {
  CuriosityConfig cfg;
  cfg.warmup_steps = 100;
  CuriosityModule m(cfg, 11);
  std::mt19937_64 rng(7);
  Eigen::MatrixXd batch(kFeatureDim, 50);
  for (int j = 0; j < 50; ++j) batch.col(j) = randv(kFeatureDim, rng);
  EXPECT_EQ(m.rewards(batch).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(m.warming_up());
  m.rewards(batch);
  EXPECT_FALSE(m.warming_up());
  const Eigen::VectorXd r = m.rewards(batch);
  EXPECT_GT(r.minCoeff(), 0.0);
  EXPECT_LE(r.maxCoeff(), 1.0);
  const Eigen::VectorXd again = m.rewards(batch);
  EXPECT_LT(again.sum(), r.sum());
  EXPECT_EQ(m.table().total(), 100u);

  std::stringstream buf;
  amphim::io::BinaryWriter w(buf);
  m.save(w);
  CuriosityModule back;
  amphim::io::BinaryReader rd(buf);
  back.load(rd);
  EXPECT_EQ(back.rewards(batch), m.rewards(batch));
}
