#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>

#include "core/rng.hpp"
#include "doctest.h"

using namespace rsgda;

// Reference blocks generated with numpy.random.Philox (philox4x64-10).
TEST_CASE("philox4x64 known-answer vectors") {
  const auto b1 = philox4x64({1, 0, 0, 0}, {0, 0});
  CHECK(b1[0] == 0x02f4ba6408e4d89bULL);
  CHECK(b1[1] == 0x3dd62b0b9ca8c5b2ULL);
  CHECK(b1[2] == 0x1c8667a55d902e79ULL);
  CHECK(b1[3] == 0x907d7a052fd5b4dcULL);

  const auto b2 = philox4x64({2, 0, 0, 0}, {0, 0});
  CHECK(b2[0] == 0x809bf322883987c3ULL);
  CHECK(b2[3] == 0xfc6ed66767a457bcULL);

  const auto bf = philox4x64({0, 0, 0, 0},
                             {0xffffffffffffffffULL, 0xffffffffffffffffULL});
  CHECK(bf[0] == 0x44b7493d1acfc229ULL);
  CHECK(bf[1] == 0x6636af8e997921ddULL);
  CHECK(bf[2] == 0x3f73e132b5b3780eULL);
  CHECK(bf[3] == 0x605644dde03b01b1ULL);

  const auto bk = philox4x64({5, 0, 0, 0}, {42, 7});
  CHECK(bk[0] == 0xcef8be52de402fc5ULL);
  CHECK(bk[2] == 0x9fd276c06f88cb2bULL);

  const auto bm = philox4x64({0x123456789abcdef0ULL, 1, 2, 3},
                             {0xdeadbeefULL, 0xcafef00dULL});
  CHECK(bm[0] == 0xa54e9b23d2b9fdc5ULL);
  CHECK(bm[1] == 0x28aa12d2bf64fcf6ULL);
  CHECK(bm[2] == 0xcb7d02e6f235e71dULL);
  CHECK(bm[3] == 0x247a226e1e938c84ULL);
}

TEST_CASE("streams replay bit for bit") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.u64() == b.u64());

  Rng c(1234);
  c.split(9);  // splitting must not disturb the parent
  for (int i = 0; i < 100; ++i) (void)b.u64();
  Rng d(1234);
  for (int i = 0; i < 100; ++i) (void)d.u64();
  CHECK(b.u64() == d.u64());
}

TEST_CASE("split children are independent of draw position") {
  Rng parent(7);
  Rng child_before = parent.split(3);
  for (int i = 0; i < 17; ++i) (void)parent.u64();
  Rng child_after = parent.split(3);
  for (int i = 0; i < 20; ++i) CHECK(child_before.u64() == child_after.u64());

  // distinct substreams diverge
  Rng x = parent.split(0);
  Rng y = parent.split(1);
  CHECK(x.u64() != y.u64());
}

TEST_CASE("unit range and coarse uniformity") {
  Rng rng(99);
  const int buckets = 16;
  int counts[16] = {0};
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    counts[static_cast<int>(u * buckets)]++;
  }
  // 5 sigma band per bucket
  const double expect = static_cast<double>(n) / buckets;
  const double sigma = std::sqrt(expect * (1.0 - 1.0 / buckets));
  for (int b = 0; b < buckets; ++b)
    CHECK(std::abs(counts[b] - expect) < 5.0 * sigma);
}

TEST_CASE("below is exact on its range") {
  Rng rng(5);
  std::map<std::uint64_t, int> seen;
  for (int i = 0; i < 30000; ++i) seen[rng.below(7)]++;
  CHECK(seen.size() == 7);
  for (const auto& [k, v] : seen) {
    CHECK(k < 7);
    CHECK(v > 3000);
  }
  CHECK_THROWS(rng.below(0));
}

TEST_CASE("normal moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}
