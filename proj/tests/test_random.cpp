#include <doctest.h>

#include <cmath>
#include <vector>

#include "sarah/errors.hpp"
#include "sarah/random.hpp"

using namespace sarah;

TEST_CASE("mixing function matches the published SplitMix64 sequence for seed 0") {
  const std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
  CHECK(splitmix64_mix(golden * 1) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64_mix(golden * 2) == 0x6E789E6AA1B965F4ULL);
  CHECK(splitmix64_mix(golden * 3) == 0x06C45D188009454FULL);
}

TEST_CASE("same seed and stream give the same sequence") {
  CounterRng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.counter() == 100);
}

TEST_CASE("different streams and seeds diverge") {
  CounterRng a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("split is a fresh stream of the same seed") {
  CounterRng base(7, 0);
  base.next_u64();
  CounterRng s = base.split(5), ref(7, 5);
  for (int i = 0; i < 10; ++i) CHECK(s.next_u64() == ref.next_u64());
}

TEST_CASE("uniform_index stays in range and is roughly uniform") {
  CounterRng rng(9);
  CHECK_THROWS_AS(rng.uniform_index(0), InvalidArgument);
  for (int i = 0; i < 100; ++i) CHECK(rng.uniform_index(1) == 0);
  const std::size_t k = 7, draws = 70000;
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < draws; ++i) {
    const auto x = rng.uniform_index(k);
    REQUIRE(x < k);
    counts[x] += 1.0;
  }
  const double expected = static_cast<double>(draws) / k;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 6 degrees of freedom; 99.9% quantile is about 22.5.
  CHECK(chi2 < 22.5);
}

TEST_CASE("uniform01 lies in [0, 1) and normal has unit variance") {
  CounterRng rng(11);
  double sum = 0.0, sum_sq = 0.0;
  const int count = 100000;
  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / count;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(count));
  CHECK(std::abs(sum_sq / count - 1.0) < 0.03);
}
