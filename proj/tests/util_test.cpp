#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>

#include "skipstep/util.hpp"

using namespace skipstep;

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Fnv, KnownVector) {
  // offset basis for the empty string, published FNV-1a test value for "a"
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs = differs || x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BoundedDrawsStayInRangeAndCoverIt) {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto x = rng.below(7);
    ASSERT_LT(x, 7u);
    seen.insert(x);
    const auto y = rng.between(-3, 3);
    ASSERT_GE(y, -3);
    ASSERT_LE(y, 3);
    const double u = rng.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, WeightedSkipsZeroWeights) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    EXPECT_NE(rng.weighted({1.0, 0.0, 2.0}), 1u);
  }
}

TEST(MixSeed, LabelsAndCountersSeparateStreams) {
  EXPECT_NE(mix_seed(1, "a"), mix_seed(1, "b"));
  EXPECT_NE(mix_seed(1, std::uint64_t{0}), mix_seed(1, std::uint64_t{1}));
  EXPECT_EQ(mix_seed(9, "x"), mix_seed(9, "x"));
}

TEST(ParallelFor, EveryIndexOnce) {
  for (int jobs : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(50, 4,
                            [](std::size_t i) {
                              if (i == 17) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Text, SplitLinesKeepsInteriorBlanks) {
  EXPECT_EQ(split_lines("a\n\nb\r\nc"),
            (std::vector<std::string>{"a", "", "b", "c"}));
  EXPECT_EQ(split_lines("a\n"), (std::vector<std::string>{"a"}));
  EXPECT_TRUE(split_lines("").empty());
}

TEST(Text, TrimSplitJoin) {
  EXPECT_EQ(trim("  x y \t"), "x y");
  EXPECT_EQ(split("1,2,,3", ','), (std::vector<std::string>{"1", "2", "", "3"}));
  EXPECT_EQ(join({"a", "b", "c"}, "--"), "a--b--c");
}

TEST(Text, FormatDoubleIsShortestRoundTrip) {
  EXPECT_EQ(format_double(100.0), "100");
  EXPECT_EQ(format_double(66.66666666666667), "66.66666666666667");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(2.0 / 3.0)), 2.0 / 3.0);
}
