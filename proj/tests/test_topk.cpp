#include <doctest.h>

#include "oracles.hpp"
#include "topkfs/topk.hpp"

using namespace topkfs;

namespace {
Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<long>(values.size()));
  long i = 0;
  for (double x : values) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("active_set picks largest magnitudes with lower-index ties") {
  CHECK(active_set(vec({3, -5, 1}), 1).indices == std::vector<int>{1});
  CHECK(active_set(vec({3, -5, 1}), 3).indices == std::vector<int>{0, 1, 2});
  CHECK(active_set(vec({2, -2, 1}), 1).indices == std::vector<int>{0});
  CHECK(active_set(vec({0, 0, 0}), 2).indices == std::vector<int>{0, 1});
}

TEST_CASE("active_set rejects bad arguments and clamps k > m") {
  CHECK_THROWS_AS(active_set(Vector(), 1), std::invalid_argument);
  CHECK_THROWS_AS(active_set(vec({1, 2}), 0), std::invalid_argument);
  Vector bad = vec({1, 2});
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(active_set(bad, 1), std::invalid_argument);
  CHECK(active_set(vec({1, 2}), 5).indices == std::vector<int>{0, 1});
}

TEST_CASE("apply_mask zeroes the complement") {
  Vector w = vec({3, -5, 1});
  Vector masked = apply_mask(w, active_set(w, 1));
  CHECK(masked == vec({0, -5, 0}));

  CHECK(apply_mask(w, active_set(w, 3)) == w);  // k = m is the identity
  Vector zero = vec({0, 0, 0});
  CHECK(apply_mask(zero, active_set(zero, 1)) == zero);

  ActiveSet bad;
  bad.indices = {5};
  bad.k_requested = 1;
  CHECK_THROWS_AS(apply_mask(w, bad), std::invalid_argument);
}

TEST_CASE("route_gradient scales on the set and zeroes elsewhere") {
  ActiveSet s;
  s.indices = {2};
  s.k_requested = 1;
  CHECK(route_gradient(vec({1, 2, 3}), s, 2.0) == vec({0, 0, 6}));

  s.indices = {0, 1, 2};
  s.k_requested = 3;
  CHECK(route_gradient(vec({1, 2, 3}), s, 1.0) == vec({1, 2, 3}));

  s.indices = {0};
  s.k_requested = 1;
  CHECK(route_gradient(vec({4, -4}), s, 0.0) == vec({0, 0}));
}

TEST_CASE("active_set matches the full-sort oracle on random vectors") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    long m = 1 + static_cast<long>(rng.uniform_index(64));
    Vector w(m);
    for (long j = 0; j < m; ++j) {
      // Coarse grid so magnitude ties actually occur.
      w[j] = std::round(rng.normal() * 4.0) / 4.0;
    }
    int k = 1 + static_cast<int>(rng.uniform_index(m));
    CHECK(active_set(w, k).indices == oracle::sorted_top_k(w, k));
  }
}

TEST_CASE("masking is idempotent and scale-equivariant") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    long m = 2 + static_cast<long>(rng.uniform_index(30));
    Vector w(m);
    for (long j = 0; j < m; ++j) w[j] = rng.normal();
    int k = 1 + static_cast<int>(rng.uniform_index(m));

    Vector once = apply_mask(w, active_set(w, k));
    Vector twice = apply_mask(once, active_set(once, k));
    CHECK(once == twice);

    double c = rng.uniform() < 0.5 ? -1.7 : 0.3;
    Vector scaled = apply_mask(Vector(c * w), active_set(Vector(c * w), k));
    CHECK((scaled - c * once).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));

    long support = (once.array() != 0.0).count();
    CHECK(support <= std::min<long>(k, m));
    long nonzero = (w.array() != 0.0).count();
    if (nonzero >= k) CHECK(support == std::min<long>(k, m));
  }
}
