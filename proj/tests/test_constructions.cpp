#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "conelab/constructions.hpp"
#include "conelab/errors.hpp"
#include "conelab/search.hpp"
#include "support.hpp"

using namespace conelab;

namespace {

  Element z(std::int64_t n) {
    return Element(LatticeForm{{n}});
  }

  Rational q(long p, long d = 1) {
    Rational r(p, d);
    r.canonicalize();
    return r;
  }

  bool same_verdict(Certificate const& a, Certificate const& b) {
    return verify_certificate(a).passed == verify_certificate(b).passed;
  }

}  // namespace

TEST_CASE("Jenkins weight on Z") {
  Group Z = make_group("Z");
  auto  J = jenkins_weight({Z, {z(1)}, q(1, 2), 10, std::nullopt});
  CHECK(J.base == q(2, 3));
  CHECK(J.rho.value_at(z(0)) == 1);
  CHECK(J.rho.value_at(z(-3)) == q(8, 27));
  CHECK(J.rho.value_at(z(11)) == 0);
  CHECK(J.pointwise.passed);
  CHECK(*J.pointwise.quantity("worst_relative_change") == q(1, 2));
  for (std::int64_t k = -9; k <= 9; ++k) {
    for (std::int64_t s : {-1, 1}) {
      Rational ratio = J.rho.value_at(z(k + s)) / J.rho.value_at(z(k));
      CHECK((ratio == q(2, 3) || ratio == q(3, 2)));
    }
  }
  // The l1 defect for f = 1: interior telescopes, the truncation adds r^N.
  REQUIRE(J.reiter.quantity("relative_defect"));
  CHECK(*J.reiter.quantity("relative_defect") > 0);
}

TEST_CASE("Jenkins spec validation and base override") {
  Group Z = make_group("Z");
  CHECK_THROWS_AS(jenkins_weight({Z, {z(1)}, q(0), 4, std::nullopt}), PreconditionError);
  CHECK_THROWS_AS(jenkins_weight({Z, {z(1)}, q(1, 2), 0, std::nullopt}), PreconditionError);
  CHECK_THROWS_AS(jenkins_weight({Z, {z(1)}, q(1, 2), 4, q(1, 2)}), PreconditionError);
  auto J = jenkins_weight({Z, {z(1)}, q(1, 2), 4, q(3, 4)});
  CHECK(J.base == q(3, 4));
  CHECK(J.pointwise.passed);
}

TEST_CASE("Jenkins weight on Z^2 and the Heisenberg group") {
  Group Z2 = make_group("Z^2");
  auto  J  = jenkins_weight({Z2, Z2.parse_elements("x,y"), q(1, 4), 30, std::nullopt});
  CHECK(J.pointwise.passed);
  CHECK(J.rho.value_at(Z2.parse_element("x^2*y^-3")) == power(q(4, 5), 5));
  // Same generators in any order give the same weight.
  auto J2 = jenkins_weight({Z2, Z2.parse_elements("y^-1,x"), q(1, 4), 30, std::nullopt});
  CHECK(J.rho == J2.rho);

  Group Hs = make_group("H3");
  auto  JH = jenkins_weight({Hs, Hs.generators(), q(1, 3), 4, std::nullopt});
  CHECK(JH.pointwise.passed);
}

TEST_CASE("tilde coefficients") {
  auto a = tilde_coefficients({q(1), q(-1), q(-1)}, q(1, 4));
  CHECK(a.values == std::vector<Rational>{q(5, 4), q(-3, 4), q(-3, 4)});
  CHECK(a.sum == q(-1, 4));
  CHECK(a.preserves_violation);
  auto b = tilde_coefficients({q(0), q(0)}, q(1, 3));
  CHECK(b.values == std::vector<Rational>{0, 0});
  CHECK_FALSE(b.preserves_violation);
  auto c = tilde_coefficients({q(1), q(-1), q(-1)}, q(1, 2));
  CHECK(c.sum == q(1, 2));
  CHECK_FALSE(c.preserves_violation);
  CHECK_THROWS_AS(tilde_coefficients({q(1)}, q(1)), PreconditionError);
  CHECK_THROWS_AS(tilde_coefficients({q(1)}, q(0)), PreconditionError);

  std::mt19937                    rng(3);
  std::uniform_int_distribution<> num(-9, 9), den(1, 7), len(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Rational> t;
    for (int i = len(rng); i > 0; --i) {
      t.push_back(q(num(rng), den(rng)));
    }
    Rational eps = q(1 + trial % 9, 10);
    auto     r   = tilde_coefficients(t, eps);
    Rational sum = 0, mass = 0;
    for (auto const& v : t) {
      sum += v;
      mass += abs_value(v);
    }
    CHECK(r.sum == sum + eps * mass);
    if (sum < 0) {
      CHECK(r.preserves_violation == (eps < abs_value(sum) / mass));
    }
  }
}

TEST_CASE("product smoothing") {
  Group P = make_group("prod(Z,Z)");
  Group H = P.factor(1);
  auto  W = ball(P, 3);

  auto coord = [](Element const& x, std::size_t i) {
    auto const& pair = std::get<PairForm>(x.form());
    return std::get<LatticeForm>(pair.factors[i].form()).coords[0];
  };

  auto J  = jenkins_weight({H, {z(1)}, q(1, 3), 12, std::nullopt});
  auto c  = constant_function(P, 1);
  auto hs = std::vector<Element>{z(1), z(-1)};
  auto r1 = product_smoothing_check(J.rho, {z(1)}, c, hs, q(1, 3), W);
  CHECK(r1.passed);
  CHECK(r1.checked == 2 * W.size());

  // f depending only on the left factor: both sides are f(x) * sum rho.
  auto left_only = custom_function(
      P, "left",
      [&](Element const& x) { return coord(x, 0) >= 0 ? Rational(1) : Rational(0); },
      1);
  CHECK(product_smoothing_check(J.rho, {z(1)}, left_only, hs, q(1, 3), W).passed);

  // A bounded function of the H coordinate: every y with f(y^-1 x) != 0
  // for x in the window has |y| <= 5 < N, so the sandwich holds termwise.
  auto right_strip = custom_function(
      P, "strip",
      [&](Element const& x) { return std::abs(coord(x, 1)) <= 2 ? Rational(1) : Rational(0); },
      1);
  CHECK(product_smoothing_check(J.rho, {z(1)}, right_strip, hs, q(1, 3), W).passed);

  // A half-line in the H coordinate sums rho up to the truncation edge,
  // where rho(y h^-1) has no partner term; the upper bound then fails.
  auto right_half = custom_function(
      P, "right",
      [&](Element const& x) { return coord(x, 1) >= 0 ? Rational(1) : Rational(0); },
      1);
  auto r3 = product_smoothing_check(J.rho, {z(1)}, right_half, hs, q(1, 3), W);
  CHECK_FALSE(r3.passed);
  for (auto const& fail : r3.failures) {
    CHECK(fail.what == "upper sandwich bound for h = x^-1");
  }
  // With slack in the base (r = 4/5 gives ratios 5/4 < 4/3) a long enough
  // truncation absorbs the edge term.
  auto J40 = jenkins_weight({H, {z(1)}, q(1, 3), 40, q(4, 5)});
  CHECK(product_smoothing_check(J40.rho, {z(1)}, right_half, hs, q(1, 3), W).passed);

  // Identity smoothing: f <= f <= f with eps = 0.
  auto delta = Weight::dirac(H, H.identity());
  CHECK(product_smoothing_check(delta, {z(1)}, right_half, {}, 0, W).passed);
  CHECK(product_smoothing_check(delta, {z(1)}, right_half, {H.identity()}, 0, W).passed);

  // A weight that is far from invariant fails, and the failures are located.
  Weight spike(H);
  spike.set(z(0), 1);
  spike.set(z(1), 10);
  auto bad = product_smoothing_check(spike, {z(1)}, right_half, {z(1)}, q(1, 10), W);
  CHECK_FALSE(bad.passed);
  REQUIRE_FALSE(bad.failures.empty());
  CHECK(W.contains(bad.failures.front().x));

  CHECK_THROWS_AS(product_smoothing_check(J.rho, {z(1)}, c, {z(2)}, q(1, 3), W), PreconditionError);
  Group Z = make_group("Z");
  CHECK_THROWS_AS(product_smoothing_check(J.rho, {z(1)}, constant_function(Z, 1), {}, q(1, 3), ball(Z, 1)),
                  PreconditionError);
}

TEST_CASE("subgroup transport") {
  Group F2 = make_group("F2");
  Group P  = make_group("prod(F2,Z)");
  auto  a  = F2.parse_element("a");
  auto  b  = F2.parse_element("b");
  auto  fA = semigroup_indicator(F2, a, b);
  TranslateViolation v{fA, {{1, F2.identity()}, {-1, a}, {-1, b}}, 4, VerificationLevel::window, {}};

  auto same = transport_subgroup(v, Embedding::identity(F2));
  auto const& sv = std::get<TranslateViolation>(same);
  CHECK(sv.f.spec() == fA.spec());
  CHECK(sv.items == v.items);

  auto moved = transport_subgroup(v, Embedding::product_factor(P, 0));
  auto const& mv = std::get<TranslateViolation>(moved);
  CHECK(mv.f.group() == P);
  CHECK(mv.provenance == std::vector<std::string>{"transport_subgroup:factor:1"});
  CHECK(verify_certificate(moved).passed);
  CHECK(structural_verify_semigroup_violation(mv).passed);

  Group Z  = make_group("Z");
  Group Z2 = make_group("Z^2");
  RatioWitness w{half_space(Z, {1}), {z(0), z(1), z(-1)}, 0, Weight::dirac(Z, z(5)), true, 1, {}};
  auto         wz2 = std::get<RatioWitness>(transport_subgroup(w, Embedding::lattice_coordinates(Z2, 1)));
  CHECK(wz2.u == Weight::dirac(Z2, Z2.parse_element("x^5")));
  CHECK(verify_certificate(wz2).passed);

  auto fw = free_to_depth(F2, a, b, 6);
  auto tf = std::get<FreenessWitness>(transport_subgroup(fw, Embedding::product_factor(P, 0)));
  CHECK(tf.free);
  CHECK(verify_certificate(tf).passed);

  CHECK_THROWS_AS(transport_subgroup(w, Embedding::product_factor(P, 0)), GroupMismatch);
}

TEST_CASE("subgroup transport preserves verdicts") {
  std::mt19937 rng(21);
  Group        Z  = make_group("Z");
  Group        Z2 = make_group("Z^2");
  Group        D  = make_group("Dinf");
  std::vector<Embedding> embeddings{Embedding::lattice_coordinates(Z2, 1), Embedding::lattice_scaling(Z, 3),
                                    Embedding::dihedral_translations(D), Embedding::identity(Z)};
  int passes = 0, fails = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto const& e = embeddings[static_cast<std::size_t>(trial) % embeddings.size()];
    auto        u = conelab::testing::random_weight(Z, rng, 3, 6, true);
    auto        f = half_space(Z, {trial % 2 == 0 ? 1 : -1});
    Rational    norm = weighted_norm(u, f);
    if (norm == 0) {
      continue;
    }
    Weight un(Z);
    for (auto const& [x, v] : u.entries()) {
      un.set(x, v / norm);
    }
    Rational      eps = q(1 + trial % 5, 4);
    ReiterWitness rw{f, {z(1), z(-1)}, eps, un, 1, {}};
    RatioWitness  qw{f, {z(0), z(1)}, eps, un, true, 1, {}};
    for (Certificate const& c : {Certificate(rw), Certificate(qw)}) {
      auto moved = transport_subgroup(c, e);
      CHECK(same_verdict(c, moved));
      (verify_certificate(c).passed ? passes : fails) += 1;
    }
  }
  CHECK(passes > 0);
  CHECK(fails > 0);
}

TEST_CASE("finite transports") {
  Group LL = make_group("LL");
  auto  a  = LL.parse_element("a");
  auto  e  = LL.identity();
  auto  avg = finite_transport(FiniteTransport::finite_normal_average, Weight::dirac(LL, e), {e, a});
  CHECK(avg.value_at(e) == 1);
  CHECK(avg.value_at(a) == 1);
  CHECK(translate(a, avg) == avg);

  auto u = Weight::dirac(LL, LL.parse_element("t"), q(2, 3));
  CHECK(finite_transport(FiniteTransport::finite_index_dominator, u, {e}) == u);

  Group F2 = make_group("F2");
  auto  fa = F2.parse_element("a");
  CHECK_THROWS_AS(finite_transport(FiniteTransport::finite_normal_average, Weight::dirac(F2, F2.identity()),
                                   {F2.identity(), fa}),
                  PreconditionError);
  // The dominator kind does not require closure.
  auto dom = finite_transport(FiniteTransport::finite_index_dominator, Weight::dirac(F2, F2.identity()),
                              {F2.identity(), fa});
  CHECK(dom.size() == 2);

  auto f  = semigroup_indicator(LL, LL.parse_element("t"), LL.parse_element("a*t"));
  auto fs = finite_transport(FiniteTransport::finite_normal_average, f, {e, a});
  for (auto const& x : ball(LL, 3).elements()) {
    CHECK(fs(x) == f(x) + f(LL.multiply(a, x)));
    CHECK(fs(LL.multiply(a, x)) == fs(x));
  }
  CHECK_THROWS_AS(finite_transport(FiniteTransport::finite_normal_average, semigroup_indicator(F2, fa, F2.parse_element("b")),
                                   {F2.identity(), fa}),
                  PreconditionError);
}
