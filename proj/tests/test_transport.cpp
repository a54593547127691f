#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "twr/random.hpp"
#include "twr/transport.hpp"

using namespace twr;

TEST_CASE("h_profile examples") {
  const Tree chain = fixtures::chain();
  const HProfile hp = h_profile(chain, dirac(chain, 2), dirac(chain, 0));
  CHECK(hp.edges == std::vector<std::size_t>{0, 1});
  CHECK(hp.h == std::vector<double>{1.0, 1.0});
  CHECK(hp.w == std::vector<double>{1.0, 2.0});

  CHECK(h_profile(chain, dirac(chain, 1), dirac(chain, 1)).empty());

  const Tree star = fixtures::star();
  const HProfile hs = h_profile(star, dirac(star, 1), dirac(star, 2));
  CHECK(hs.edges == std::vector<std::size_t>{0, 1});
  CHECK(hs.h == std::vector<double>{1.0, 1.0});
}

TEST_CASE("measures outside the tree raise TreeMismatch") {
  const Tree chain = fixtures::chain();
  const Measure far = fixtures::atoms({{7, 1.0}});
  try {
    h_profile(chain, far, dirac(chain, 0));
    FAIL("expected TreeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TreeMismatch);
  }
  CHECK_THROWS_AS(tw_distance(chain, dirac(chain, 0), far), Error);
}

TEST_CASE("tw_distance examples") {
  const Tree chain = fixtures::chain();
  CHECK(tw_distance(chain, dirac(chain, 2), dirac(chain, 0)) == 3.0);
  const Measure mu = fixtures::atoms({{0, 0.25}, {2, 0.75}});
  CHECK(tw_distance(chain, mu, mu) == 0.0);
  const Tree star = fixtures::star();
  CHECK(tw_distance(star, dirac(star, 1), dirac(star, 2)) == 2.0);
}

TEST_CASE("restricted and full sweeps agree bit for bit") {
  gen::Rng rng(8);
  for (int k = 0; k < 300; ++k) {
    const Tree t = gen::random_tree(rng, 2 + k % 200);
    const Measure mu = gen::random_measure(rng, t.node_count(), 10);
    const Measure nu = gen::random_measure(rng, t.node_count(), 10);
    Workspace ws(t);
    const HProfile a = h_profile(t, mu, nu, ws);
    const HProfile b = h_profile_full(t, mu, nu);
    REQUIRE(a.edges == b.edges);
    REQUIRE(a.h == b.h);
    REQUIRE(a.w == b.w);
    CHECK(tw_distance(a) == tw_distance(b));
    // Dense sum with zeros everywhere else gives the same bits.
    const EdgeVector dense = a.to_dense(t.edge_count());
    const EdgeVector w = t.weights();
    double s = 0.0;
    for (std::size_t e = 0; e < dense.size(); ++e) s += w[e] * dense[e];
    CHECK(s == tw_distance(a));
  }
}

TEST_CASE("workspace reuse across many pairs") {
  gen::Rng rng(9);
  const Tree t = gen::random_tree(rng, 500);
  Workspace ws(t);
  for (int k = 0; k < 200; ++k) {
    const Measure mu = gen::random_measure(rng, t.node_count(), 6);
    const Measure nu = gen::random_measure(rng, t.node_count(), 6);
    CHECK(tw_distance(h_profile(t, mu, nu, ws)) == tw_distance(h_profile_full(t, mu, nu)));
  }
}

TEST_CASE("tw is a metric on random triples") {
  gen::Rng rng(10);
  for (int k = 0; k < 2000; ++k) {
    const Tree t = gen::random_tree(rng, 2 + k % 40);
    const Measure a = gen::random_measure(rng, t.node_count(), 5);
    const Measure b = gen::random_measure(rng, t.node_count(), 5);
    const Measure c = gen::random_measure(rng, t.node_count(), 5);
    const double ab = tw_distance(t, a, b);
    CHECK(ab == tw_distance(t, b, a));
    CHECK(tw_distance(t, a, a) == 0.0);
    CHECK(ab <= tw_distance(t, a, c) + tw_distance(t, c, b) + 1e-12);
  }
}

TEST_CASE("Dirac-to-Dirac transport is the ground distance") {
  gen::Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    // Dyadic weights: every sum is exact, whatever the order.
    std::vector<EdgeSpec> edges;
    const std::size_t n = 2 + k;
    for (NodeId v = 1; v < n; ++v) {
      edges.push_back({v, static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng)),
                       std::uniform_int_distribution<int>(0, 64)(rng) / 16.0});
    }
    const Tree t = Tree::build(edges, 0);
    for (NodeId x = 0; x < n; ++x)
      for (NodeId z = 0; z < n; ++z) REQUIRE(tw_distance(t, dirac(t, x), dirac(t, z)) == tree_distance(t, x, z));
  }
  for (int k = 0; k < 50; ++k) {
    const Tree t = gen::random_tree(rng, 2 + k);
    const NodeId x = static_cast<NodeId>(k % t.node_count()), z = static_cast<NodeId>((k * 7) % t.node_count());
    CHECK(std::abs(tw_distance(t, dirac(t, x), dirac(t, z)) - tree_distance(t, x, z)) <= 1e-12);
  }
}

TEST_CASE("compensated summation stays within rounding of the naive sum") {
  gen::Rng rng(13);
  const Tree t = gen::random_tree(rng, 5000);
  for (int k = 0; k < 20; ++k) {
    const Measure mu = gen::random_measure(rng, t.node_count(), 40);
    const Measure nu = gen::random_measure(rng, t.node_count(), 40);
    const HProfile hp = h_profile(t, mu, nu);
    CHECK(tw_distance(hp, Summation::Compensated) == doctest::Approx(tw_distance(hp)).epsilon(1e-13));
  }
}
