#include <catch_amalgamated.hpp>

#include <set>

#include "steinrmt/parallel.hpp"
#include "steinrmt/rng.hpp"
#include "support.hpp"

using namespace steinrmt;

TEST_CASE("same seed and stream reproduce the sequence") {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a() == b());
    REQUIRE(a.normal() == b.normal());
  }
}

TEST_CASE("streams differ") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 200; ++s) firsts.insert(Rng(7, s)());
  REQUIRE(firsts.size() == 200);
  REQUIRE(derive_stream_seed(1, 0) != derive_stream_seed(0, 1));
}

TEST_CASE("split does not advance the parent") {
  Rng a(5);
  Rng b(5);
  auto child = a.split(9);
  (void)child();
  REQUIRE(a() == b());
  REQUIRE(a.split(9)() == b.split(9)());
}

TEST_CASE("uniform ranges") {
  Rng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = r.uniform_open();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("normal and complex normal moments") {
  Rng r(11);
  const std::size_t N = 200000;
  std::vector<double> x(N), x2(N), z2(N), x4(N);
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = r.normal();
    x2[i] = x[i] * x[i];
    x4[i] = x2[i] * x2[i];
    z2[i] = std::norm(r.complex_normal());
  }
  REQUIRE(testsupport::within_se(testsupport::mean_of(x), 0.0, 4.0));
  REQUIRE(testsupport::within_se(testsupport::mean_of(x2), 1.0, 4.0));
  REQUIRE(testsupport::within_se(testsupport::mean_of(x4), 3.0, 4.0));
  REQUIRE(testsupport::within_se(testsupport::mean_of(z2), 1.0, 4.0));
}

TEST_CASE("parallel_for covers every index once for any worker count") {
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) REQUIRE(h == 1);
  }
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  REQUIRE_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i) {
                                   if (i == 57) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("thread resolution") {
  REQUIRE(resolve_threads(3u) == 3u);
  REQUIRE(resolve_threads() >= 1u);
}
