#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "brn_reference.hpp"
#include "wmbind/brn.hpp"

using namespace wmbind;

namespace {

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST(BuildRandom, DefaultSizeHasExactFanIn) {
  RngStream rng(11);
  auto net = build_random(1000, 20, rng);
  EXPECT_EQ(net.edge_count(), 20000u);
  for (std::size_t j = 0; j < net.n; ++j) {
    ASSERT_EQ(net.in_degree(j), 20u);
    auto src = net.sources_of(j);
    std::set<std::uint32_t> uniq(src.begin(), src.end());
    EXPECT_EQ(uniq.size(), 20u);
    EXPECT_EQ(uniq.count(static_cast<std::uint32_t>(j)), 0u);
    EXPECT_TRUE(std::is_sorted(src.begin(), src.end()));
  }
}

TEST(BuildRandom, TwoNodesHaveOnlyOneWiring) {
  RngStream rng(3);
  auto net = build_random(2, 1, rng);
  ASSERT_EQ(net.sources_of(0).size(), 1u);
  EXPECT_EQ(net.sources_of(0)[0], 1u);
  EXPECT_EQ(net.sources_of(1)[0], 0u);
}

TEST(BuildRandom, ExcitatoryFractionWithinThreeSigma) {
  const double sigma = std::sqrt(20000.0 * (2.0 / 3.0) * (1.0 / 3.0));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    auto net = build_random(1000, 20, rng);
    std::size_t pos = 0;
    for (double w : net.weights) {
      ASSERT_TRUE(w == 0.5 || w == -1.0);
      pos += w == 0.5;
    }
    EXPECT_LT(std::abs(static_cast<double>(pos) - 20000.0 * 2.0 / 3.0), 3.0 * sigma) << "seed " << seed;
  }
}

TEST(BuildRandom, IncomingWeightSumBalanced) {
  // Per node: sum of 20 iid draws with mean 0 and variance 0.5, so the mean
  // over 1000 nodes has sd sqrt(20 * 0.5 / 1000).
  RngStream rng(5);
  auto net = build_random(1000, 20, rng);
  double total = 0.0;
  for (std::size_t j = 0; j < net.n; ++j)
    for (double w : net.weights_of(j)) total += w;
  EXPECT_LT(std::abs(total / 1000.0), 3.0 * std::sqrt(20 * 0.5 / 1000.0));
}

TEST(BuildRandom, RejectsDegreeAtLeastN) {
  RngStream rng(1);
  EXPECT_THROW(build_random(5, 5, rng), std::invalid_argument);
  EXPECT_THROW(build_random(5, 9, rng), std::invalid_argument);
}

TEST(BuildRandom, SameSeedSameNet) {
  RngStream a(42), b(42), c(43);
  auto na = build_random(200, 20, a);
  auto nb = build_random(200, 20, b);
  auto nc = build_random(200, 20, c);
  EXPECT_EQ(na, nb);
  EXPECT_EQ(na.fingerprint(), nb.fingerprint());
  EXPECT_NE(na.fingerprint(), nc.fingerprint());
}

TEST(BuildLattice, DegreeTwoNeighbours) {
  auto net = build_lattice(10, 2);
  auto src = net.sources_of(5);
  ASSERT_EQ(std::vector<std::uint32_t>(src.begin(), src.end()), (std::vector<std::uint32_t>{4, 6}));
  for (double w : net.weights_of(5)) EXPECT_EQ(w, 0.5);
}

TEST(BuildLattice, DegreeFourMarksMultiplesOfThree) {
  auto net = build_lattice(10, 4);
  auto src = net.sources_of(5);
  auto wt = net.weights_of(5);
  ASSERT_EQ(std::vector<std::uint32_t>(src.begin(), src.end()), (std::vector<std::uint32_t>{2, 3, 4, 6, 7, 8}));
  for (std::size_t e = 0; e < src.size(); ++e) {
    int dist = std::abs(static_cast<int>(src[e]) - 5);
    EXPECT_EQ(wt[e], dist == 3 ? -1.0 : 0.5) << "source " << src[e];
  }
}

TEST(BuildLattice, SymmetricAndNoWrap) {
  const std::size_t n = 40, d = 7;
  auto net = build_lattice(n, d);
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    auto src = net.sources_of(j);
    auto wt = net.weights_of(j);
    for (std::size_t e = 0; e < src.size(); ++e) dense[j * n + src[e]] = wt[e];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_EQ(dense[i * n + j], dense[j * n + i]);
      std::size_t dist = i > j ? i - j : j - i;
      bool edge = dist > 0 && dist < d;
      EXPECT_EQ(dense[j * n + i] != 0.0, edge);
    }
  EXPECT_EQ(net.in_degree(0), d - 1);
  EXPECT_EQ(net.in_degree(n / 2), 2 * (d - 1));
}

TEST(BuildLattice, RejectsBadDegree) {
  EXPECT_THROW(build_lattice(10, 0), std::invalid_argument);
  EXPECT_THROW(build_lattice(10, 5), std::invalid_argument);
}

TEST(BrnStep, ZeroIsFixedPoint) {
  RngStream rng(2);
  auto net = build_random(50, 5, rng);
  auto s = brn_step(net, BrnState::zeros(50), std::vector<double>(50, 0.0));
  EXPECT_EQ(s, BrnState::zeros(50));
}

TEST(BrnStep, SingleInjectionScaledByForgetRate) {
  RngStream rng(2);
  auto net = build_random(50, 5, rng);
  std::vector<double> in(50, 0.0);
  in[17] = 1.0;
  auto s = brn_step(net, BrnState::zeros(50), in);
  for (std::size_t j = 0; j < 50; ++j) EXPECT_EQ(s.activations[j], j == 17 ? 1.0 / 3.0 : 0.0);
}

TEST(BrnStep, NegativeDriveRectifies) {
  // Hand-built: node 1 hears node 0 through weight -1, drive = -0.7.
  BrnNet net;
  net.n = 2;
  net.d = 1;
  net.offsets = {0, 1, 2};
  net.sources = {1, 0};
  net.weights = {-1.0, -1.0};
  BrnState prev{{0.7, 0.0}};
  auto s = brn_step(net, prev, std::vector<double>(2, 0.0));
  EXPECT_EQ(s.activations[1], 0.0);
}

TEST(BrnStep, DimensionMismatchThrows) {
  RngStream rng(2);
  auto net = build_random(10, 3, rng);
  EXPECT_THROW(brn_step(net, BrnState::zeros(9), std::vector<double>(10)), std::invalid_argument);
  EXPECT_THROW(brn_step(net, BrnState::zeros(10), std::vector<double>(11)), std::invalid_argument);
}

TEST(BrnStep, MatchesDenseReferenceBitForBit) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RngStream rng(seed);
    auto net = build_random(20, 6, rng);
    brn_reference::DenseRef ref(net);
    RngStream in_rng = rng.fork("inputs");
    BrnState s = BrnState::zeros(20);
    std::vector<double> p(20, 0.0);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> in(20, 0.0);
      for (std::size_t k = 0; k < 7; ++k) in[k * 3] = in_rng.uniform();
      s = brn_step(net, s, in);
      p = ref.step(p, in);
      ASSERT_EQ(s.activations, p) << "seed " << seed << " step " << t;
      for (double a : s.activations) ASSERT_GE(a, 0.0);
    }
  }
}

TEST(BrnStep, LinearBelowClamp) {
  // A chain of excitatory edges with positive inputs never rectifies.
  auto net = build_lattice(12, 2);
  BrnState s{std::vector<double>(12)};
  std::vector<double> in(12);
  RngStream rng(9);
  for (std::size_t i = 0; i < 12; ++i) {
    s.activations[i] = rng.uniform(0.1, 1.0);
    in[i] = rng.uniform(0.1, 1.0);
  }
  const double alpha = 2.5;
  BrnState s2 = s;
  std::vector<double> in2 = in;
  for (auto& v : s2.activations) v *= alpha;
  for (auto& v : in2) v *= alpha;
  auto a = brn_step(net, s, in);
  auto b = brn_step(net, s2, in2);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(b.activations[i], alpha * a.activations[i], 1e-12);
}

TEST(BrnStep, ZeroInputActivityDecays) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    auto net = build_random(1000, 20, rng);
    auto pat_rng = rng.fork("pattern");
    std::vector<double> pat(1000);
    for (auto& v : pat) v = pat_rng.uniform();
    auto tr = impulse_trace(net, ImpulseMode::single_shot, pat, 31);
    double early = 0.0, late = 0.0;
    for (std::size_t t = 0; t <= 10; ++t) early += mean(tr.row(t));
    for (std::size_t t = 20; t <= 30; ++t) late += mean(tr.row(t));
    EXPECT_LT(late, early) << "seed " << seed;
  }
}

TEST(BrnStep, WeightsUnchangedByStepping) {
  RngStream rng(4);
  auto net = build_random(100, 10, rng);
  auto before = net.fingerprint();
  BrnState s = BrnState::zeros(100);
  std::vector<double> in(100, 1.0);
  for (int t = 0; t < 100; ++t) s = brn_step(net, s, in);
  EXPECT_EQ(net.fingerprint(), before);
}

TEST(ImpulseTrace, ZeroPatternGivesZeroTrace) {
  RngStream rng(1);
  auto net = build_random(100, 10, rng);
  auto tr = impulse_trace(net, ImpulseMode::repetitive, std::vector<double>(100, 0.0), 20);
  EXPECT_EQ(tr.rows, 20u);
  for (double v : tr.data) EXPECT_EQ(v, 0.0);
}

TEST(ImpulseTrace, RowsAreSuccessiveStates) {
  RngStream rng(1);
  auto net = build_random(30, 4, rng);
  std::vector<double> pat(30, 0.0);
  for (std::size_t i = 0; i < 30; i += 2) pat[i] = 1.0;
  auto single = impulse_trace(net, ImpulseMode::single_shot, pat, 5);
  auto rep = impulse_trace(net, ImpulseMode::repetitive, pat, 5);
  BrnState a = brn_step(net, BrnState::zeros(30), pat);
  BrnState b = a;
  const std::vector<double> zero(30, 0.0);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_TRUE(std::ranges::equal(single.row(t), a.activations));
    EXPECT_TRUE(std::ranges::equal(rep.row(t), b.activations));
    a = brn_step(net, a, zero);
    b = brn_step(net, b, pat);
  }
}

TEST(ImpulseTrace, SingleShotPersistsThenDecays) {
  RngStream rng(7);
  auto net = build_random(1000, 20, rng);
  auto pr = rng.fork("pattern");
  std::vector<double> pat(1000);
  for (auto& v : pat) v = pr.bit();
  auto tr = impulse_trace(net, ImpulseMode::single_shot, pat, 30);
  double m1 = mean(tr.row(0));
  EXPECT_GT(mean(tr.row(2)), 0.0);
  EXPECT_LT(mean(tr.row(29)), 0.1 * m1);
}

TEST(ImpulseTrace, RepetitiveStaysBounded) {
  RngStream rng(7);
  auto net = build_random(1000, 20, rng);
  auto pr = rng.fork("pattern");
  std::vector<double> pat(1000);
  for (auto& v : pat) v = pr.uniform();
  auto tr = impulse_trace(net, ImpulseMode::repetitive, pat, 100);
  auto mx = [&](std::size_t t) { return std::ranges::max(tr.row(t)); };
  for (double v : tr.data) ASSERT_TRUE(std::isfinite(v));
  EXPECT_LT(std::abs(mx(99) - mx(98)), 0.05 * mx(98));
}
