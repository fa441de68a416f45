#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>
#include <random>
#include <unordered_set>

#include "conelab/ball.hpp"
#include "conelab/errors.hpp"
#include "conelab/group.hpp"

using namespace conelab;

namespace {

  std::vector<Group> catalog() {
    return {make_group("Z"),
            make_group("Z^2"),
            make_group("F2"),
            make_group("H3"),
            make_group("LL"),
            make_group("BS1_2"),
            make_group("Dinf"),
            make_group("prod(F2,Z)"),
            make_group("mat:[[2,0],[0,1/2]],[[0,1],[1,0]]")};
  }

  Element random_element(Group const& G, std::mt19937& rng, int max_len = 6) {
    auto const&                     gens = G.generators();
    std::uniform_int_distribution<> len(0, max_len);
    std::uniform_int_distribution<> pick(0, static_cast<int>(gens.size()) - 1);
    Element                         g = G.identity();
    for (int i = len(rng); i > 0; --i) {
      g = G.multiply(g, gens[pick(rng)]);
    }
    return g;
  }

  // Affine maps x -> alpha x + beta evaluated as functions, independent of
  // the AffineForm arithmetic.
  using AffineFn = std::function<Rational(Rational const&)>;

  AffineFn as_function(Element const& g) {
    auto const& f     = std::get<AffineForm>(g.form());
    Rational    alpha = power(Rational(2), f.exponent);
    Rational    beta  = f.shift;
    return [alpha, beta](Rational const& x) { return Rational(alpha * x + beta); };
  }

}  // namespace

TEST_CASE("make_group builds the catalog") {
  Group Z2 = make_group("Z^2");
  CHECK(Z2.identity() == Element(LatticeForm{{0, 0}}));
  CHECK(make_group("Z").spec() == "Z");
  CHECK(make_group("Z^1").spec() == "Z");
  CHECK(make_group("prod(F2, Z)").spec() == "prod(F2,Z)");
  CHECK(make_group("F2").generators().size() == 4);
  CHECK(make_group("LL").generators().size() == 3);  // t, t^-1, a
  CHECK(make_group("Dinf").generators().size() == 3);
}

TEST_CASE("infinite dihedral as a matrix group") {
  Group D = make_group("mat:[[2,0],[0,1/2]],[[0,1],[1,0]]");
  CHECK(D.kind() == GroupKind::matrix_group);
  auto const& g = D.named_elements();
  REQUIRE(g.size() == 2);
  Element s = g[1].second;
  Element t = g[0].second;
  CHECK(D.multiply(s, s) == D.identity());
  // s t s = t^-1
  CHECK(D.multiply(D.multiply(s, t), s) == D.inverse(t));
  // Same growth as the native realization, which checks both sets of
  // canonical forms against each other.
  Group native = make_group("Dinf");
  for (std::size_t n = 0; n <= 6; ++n) {
    CHECK(ball(D, n).size() == ball(native, n).size());
  }
}

TEST_CASE("make_group errors") {
  CHECK_THROWS_AS(make_group("BS1_1"), ParseError);
  CHECK_THROWS_AS(make_group("mat:[[1,1],[1,1]]"), ParseError);
  CHECK_THROWS_AS(make_group("mat:[[1,0]]"), ParseError);
  CHECK_THROWS_AS(make_group("Q"), ParseError);
  CHECK_THROWS_AS(make_group("prod(Z,F2"), ParseError);
  try {
    make_group("prod(Z,Q)");
    FAIL("expected a parse error");
  } catch (ParseError const& e) {
    CHECK(e.position() == 7);
  }
}

TEST_CASE("BS(1,2) generators satisfy a b a^-1 = b^2") {
  Group   BS = make_group("BS1_2");
  Element a  = BS.parse_element("a");
  Element b  = BS.parse_element("b");
  Element lhs = BS.multiply(BS.multiply(a, b), BS.inverse(a));
  CHECK(lhs == BS.multiply(b, b));
  // Function composition oracle at sample points.
  auto fa = as_function(a), fb = as_function(b), fai = as_function(BS.inverse(a));
  for (int x = -3; x <= 3; ++x) {
    Rational q(x, 3);
    q.canonicalize();
    CHECK(fa(fb(fai(q))) == q + 2);
  }
}

TEST_CASE("multiply examples") {
  Group Z2 = make_group("Z^2");
  CHECK(Z2.multiply(Element(LatticeForm{{1, 2}}), Element(LatticeForm{{3, -1}}))
        == Element(LatticeForm{{4, 1}}));
  Group F2 = make_group("F2");
  CHECK(F2.parse_element("a*a^-1") == F2.identity());
  Group   BS = make_group("BS1_2");
  Element p  = BS.multiply(BS.parse_element("a"), BS.parse_element("b"));
  // (x -> 2x) o (x -> x + 1) = x -> 2x + 2
  auto fn = as_function(p);
  for (int x = -2; x <= 2; ++x) {
    CHECK(fn(x) == 2 * x + 2);
  }
  CHECK(p == Element(AffineForm{1, 2}));
}

TEST_CASE("inverse examples") {
  Group Z2 = make_group("Z^2");
  CHECK(Z2.inverse(Element(LatticeForm{{3, -1}})) == Element(LatticeForm{{-3, 1}}));
  Group F2 = make_group("F2");
  CHECK(F2.inverse(F2.parse_element("a*b")) == F2.parse_element("b^-1*a^-1"));
  Group   LL = make_group("LL");
  Element g(LamplighterForm{{0}, 1});
  Element gi = LL.inverse(g);
  CHECK(gi == Element(LamplighterForm{{-1}, -1}));
  CHECK(LL.multiply(g, gi) == LL.identity());
  CHECK(LL.multiply(gi, g) == LL.identity());
}

TEST_CASE("element/group mismatch") {
  Group Z = make_group("Z");
  Group F = make_group("F2");
  CHECK_THROWS_AS(Z.multiply(Z.identity(), F.identity()), GroupMismatch);
  CHECK_THROWS_AS(F.inverse(Z.identity()), GroupMismatch);
  CHECK_THROWS_AS(make_group("Z^2").inverse(Z.identity()), GroupMismatch);
  CHECK_THROWS_AS(make_group("BS1_3").inverse(Element(AffineForm{0, Rational(1, 2)})),
                  GroupMismatch);
}

TEST_CASE("element literals round-trip through words") {
  std::mt19937 rng(7);
  for (auto const& G : catalog()) {
    for (int i = 0; i < 50; ++i) {
      Element g = random_element(G, rng);
      CAPTURE(G.spec());
      CAPTURE(G.format(g));
      CHECK(G.parse_element(G.format(g)) == g);
    }
  }
  Group F2 = make_group("F2");
  CHECK(F2.format(F2.parse_element("a*b^-1*a^2")) == "a*b^-1*a^2");
  CHECK(F2.format(F2.identity()) == "e");
  CHECK_THROWS_AS(F2.parse_element("a*q"), ParseError);
  CHECK_THROWS_AS(F2.parse_element("a^"), ParseError);
  CHECK_THROWS_AS(F2.parse_element("a b"), ParseError);
  Group Z2 = make_group("prod(Z,Z)");
  CHECK(Z2.format(Z2.parse_element("x^2*x_2^-1")) == "x^2*x_2^-1");
}

TEST_CASE("group axioms on random triples") {
  std::mt19937 rng(2024);
  for (auto const& G : catalog()) {
    CAPTURE(G.spec());
    Element e = G.identity();
    for (int i = 0; i < 1000; ++i) {
      Element a = random_element(G, rng), b = random_element(G, rng),
              c = random_element(G, rng);
      REQUIRE(G.multiply(G.multiply(a, b), c) == G.multiply(a, G.multiply(b, c)));
      REQUIRE(G.multiply(a, e) == a);
      REQUIRE(G.multiply(e, a) == a);
      REQUIRE(G.multiply(a, G.inverse(a)) == e);
      REQUIRE(G.multiply(G.inverse(a), a) == e);
    }
  }
}

TEST_CASE("ball examples and exact counts") {
  CHECK(ball(make_group("Z"), 3).size() == 7);
  CHECK(ball(make_group("Z^2"), 2).size() == 13);
  CHECK(ball(make_group("F2"), 2).size() == 17);
  for (std::size_t n = 0; n <= 8; ++n) {
    CHECK(ball(make_group("Z"), n).size() == 2 * n + 1);
    CHECK(ball(make_group("Z^2"), n).size() == 2 * n * n + 2 * n + 1);
    std::size_t pow3 = 1;
    for (std::size_t i = 0; i < n; ++i) {
      pow3 *= 3;
    }
    CHECK(ball(make_group("F2"), n).size() == 2 * pow3 - 1);
  }
  Group LL = make_group("LL");
  CHECK(ball(LL, 1).size() == 4);
}

TEST_CASE("ball layers are disjoint, sorted and geodesic") {
  for (auto const& G : catalog()) {
    CAPTURE(G.spec());
    BallTable                       B = ball(G, 5);
    std::unordered_set<std::string> seen;
    std::size_t                     total = 0;
    for (std::size_t n = 0; n < B.layers.size(); ++n) {
      auto const& layer = B.layers[n];
      CHECK(std::is_sorted(layer.begin(), layer.end()));
      for (auto const& g : layer) {
        CHECK(seen.insert(g.key()).second);
        CHECK(*B.length_of(g) == n);
        if (n >= 1) {
          bool has_parent = false;
          for (auto const& s : B.generating_set) {
            auto len = B.length_of(G.multiply(g, s));
            has_parent |= len && *len + 1 == n;
          }
          CHECK(has_parent);
        }
      }
      total += layer.size();
    }
    CHECK(total == B.size());
  }
}

TEST_CASE("canonical keys: distinct elements of B6 have distinct keys") {
  // A second realization of BS(1,2) by 2x2 affine matrices; equal ball
  // sizes mean neither realization merges or splits elements.
  Group BS  = make_group("BS1_2");
  Group mat = make_group("mat:[[2,0],[0,1]],[[1,1],[0,1]]");
  for (std::size_t n = 0; n <= 6; ++n) {
    CHECK(ball(BS, n).size() == ball(mat, n).size());
  }
  // Reaching an element along two paths gives the same key.
  for (auto const& G : catalog()) {
    CAPTURE(G.spec());
    BallTable B = ball(G, 4);
    for (auto const& g : B.elements()) {
      for (auto const& s : B.generating_set) {
        CHECK(G.multiply(G.multiply(g, s), G.inverse(s)).key() == g.key());
      }
    }
  }
}

TEST_CASE("word length is 1-Lipschitz under right multiplication") {
  for (auto const& G : catalog()) {
    BallTable B = ball(G, 6);
    for (auto const& layer : B.layers) {
      if (&layer == &B.layers.back()) {
        break;
      }
      for (auto const& g : layer) {
        auto len = *B.length_of(g);
        for (auto const& s : B.generating_set) {
          auto l2 = *B.length_of(G.multiply(g, s));
          CHECK(l2 + 1 >= len);
          CHECK(l2 <= len + 1);
        }
      }
    }
  }
}

TEST_CASE("ball sizes are submultiplicative") {
  for (auto const& G : catalog()) {
    CAPTURE(G.spec());
    std::vector<std::size_t> sizes;
    BallTable                B = ball(G, 8);
    std::size_t              acc = 0;
    for (auto const& layer : B.layers) {
      acc += layer.size();
      sizes.push_back(acc);
    }
    for (std::size_t m = 0; m <= 8; ++m) {
      for (std::size_t n = 0; m + n <= 8; ++n) {
        CHECK(sizes[m + n] <= sizes[m] * sizes[n]);
      }
    }
  }
}

TEST_CASE("ball cap") {
  CHECK_THROWS_AS(ball(make_group("F2"), 8, 1000), CapExceeded);
  CHECK_THROWS_AS(ball(make_group("F2"), std::vector<Element>{}, 2), PreconditionError);
}

TEST_CASE("growth reports") {
  Group Z = make_group("Z");
  auto  r = growth_report(Z, Z.generators(), 8);
  REQUIRE(r.sizes.size() == 9);
  CHECK(r.sizes.back() == 17);
  CHECK(r.ratios.back() == Rational(17, 15));
  CHECK(r.trend == GrowthTrend::polynomial_like);

  Group F2 = make_group("F2");
  auto  f  = growth_report(F2, F2.generators(), 8);
  CHECK(f.sizes.back() == 13121);
  CHECK(f.ratios.back() == Rational(13121, 4373));
  CHECK(f.trend == GrowthTrend::exponential_like);

  Group LL = make_group("LL");
  auto  l  = growth_report(LL, LL.generators(), 8);
  for (auto const& q : l.ratios) {
    CHECK(q > Rational(5, 4));
  }
  CHECK(l.trend == GrowthTrend::exponential_like);

  auto capped = growth_report(F2, F2.generators(), 8, 500);
  CHECK(capped.truncated);
  CHECK(capped.trend == GrowthTrend::inconclusive);
  CHECK(capped.sizes.size() < 9);

  CHECK_THROWS_AS(growth_report(Z, Z.generators(), 1), PreconditionError);
}

TEST_CASE("product sets S^n") {
  Group Z = make_group("Z");
  auto  s = product_set_sizes(Z, std::vector<Element>{Z.parse_element("x")}, 4);
  CHECK(s == std::vector<std::size_t>{1, 1, 1, 1, 1});
  auto s2 = product_set_sizes(Z, Z.generators(), 4);
  CHECK(s2 == std::vector<std::size_t>{1, 2, 3, 4, 5});
  Group F2 = make_group("F2");
  auto  f  = product_set_sizes(F2, F2.parse_elements("a,b"), 5);
  CHECK(f == std::vector<std::size_t>{1, 2, 4, 8, 16, 32});
}
