// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "conelab/ball.hpp"
#include "conelab/certificates.hpp"
#include "conelab/cli.hpp"
#include "conelab/constructions.hpp"
#include "conelab/errors.hpp"
#include "conelab/lp.hpp"
#include "conelab/search.hpp"
#include "fixtures.hpp"
#include "lp_random.hpp"
#include "oracles.hpp"

using namespace conelab;

namespace {

  Rational q(long p, long d = 1) {
    Rational r(p, d);
    r.canonicalize();
    return r;
  }

  Element z(std::int64_t n) {
    return Element(LatticeForm{{n}});
  }

  QuerySpec query(std::vector<Element> S, std::size_t R) {
    QuerySpec spec;
    spec.test_set      = std::move(S);
    spec.window_radius = R;
    return spec;
  }

  // Collects failed expectations for one criterion.
  struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, std::string const& what) {
      if (!ok) {
        failures.push_back(what);
      }
    }
  };

  struct Criterion {
    int                         number;
    std::string                 title;
    double                      budget_seconds;
    std::function<void(Check&)> body;
  };

  std::string run_cli(std::vector<std::string> args, int* code = nullptr) {
    args.insert(args.begin(), "conelab");
    std::ostringstream out, err;
    int                c = cli::run(args, out, err);
    if (code) {
      *code = c;
    }
    return out.str();
  }

  // Every coefficient list of a certificate JSON, perturbed one entry at a
  // time by 1/1000; `stride` thins out very long lists.
  void tamper_each(Check& c, Json const& base, char const* list, char const* field, std::string const& label,
                   std::size_t stride = 1) {
    auto const& entries = base.at(list);
    for (std::size_t i = 0; i < entries.size(); i += stride) {
      Json j       = base;
      auto old     = parse_rational(j[list][i][field].get<std::string>());
      j[list][i][field] = to_pq(old + Rational(1, 1000));
      c.expect(!verify_json(j).passed, label + ": tampered entry " + std::to_string(i) + " still verifies");
    }
  }

  // ------------------------------------------------------------ fixtures

  struct FreeFixture {
    Group        G = make_group("F2");
    Element      a = G.parse_element("a");
    Element      b = G.parse_element("b");
    TestFunction f = semigroup_indicator(G, a, b);
  };

  void criterion_balls(Check& c) {
    Group Z  = make_group("Z");
    Group Z2 = make_group("Z^2");
    Group F2 = make_group("F2");
    Group LL = make_group("LL");
    // Closed forms: 2n+1, 2n^2+2n+1, 2*3^n-1.
    c.expect(ball(Z, 8).size() == 2 * 8 + 1, "|B_8(Z)| != 17");
    c.expect(ball(Z2, 8).size() == 2 * 64 + 2 * 8 + 1, "|B_8(Z^2)| != 145");
    c.expect(ball(F2, 8).size() == 2 * 6561 - 1, "|B_8(F2)| != 13121");
    auto S = LL.parse_elements("t,t^-1,a");
    c.expect(ball(LL, S, 1).size() == 4, "|B_1(LL)| != 4");
  }

  void criterion_growth(Check& c) {
    Group F2 = make_group("F2");
    auto  rf = growth_report(F2, F2.generators(), 8);
    c.expect(rf.ratios.back() == q(13121, 4373), "F2 ratio at 8 is not 13121/4373");
    c.expect(rf.ratios.back() >= q(299, 100) && rf.ratios.back() <= q(301, 100), "F2 ratio outside [2.99, 3.01]");
    c.expect(rf.trend == GrowthTrend::exponential_like, "F2 not labelled exponential-like");
    Group Z  = make_group("Z");
    auto  rz = growth_report(Z, Z.generators(), 8);
    // ratios[n] = |B_{n+1}| / |B_n|
    for (std::size_t n = 7; n < rz.ratios.size(); ++n) {
      c.expect(rz.ratios[n] <= q(17, 15), "Z ratio above 17/15 at n = " + std::to_string(n));
    }
    c.expect(rz.trend == GrowthTrend::polynomial_like, "Z not labelled polynomial-like");
  }

  void criterion_alternative(Check& c) {
    std::mt19937 rng(20240601);
    int          oracle = 0, witnesses = 0, violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
      auto inst = testing::random_instance(rng, 4, 4);
      auto out  = windowed_alternative(inst.f, inst.query);
      if (out.witness.has_value() == out.violation.has_value()) {
        c.expect(false, inst.label + ": not exactly one branch");
        continue;
      }
      if (out.witness) {
        ++witnesses;
        c.expect(verify_certificate(*out.witness).passed, inst.label + ": witness fails its verifier");
      } else {
        ++violations;
        c.expect(verify_certificate(*out.violation, inst.query.window_radius).passed,
                 inst.label + ": violation fails on its window");
      }
      if (inst.query.test_set.size() <= 3 && inst.query.window(inst.group).size() <= 8) {
        ++oracle;
        c.expect(testing::membership_feasible(inst.f, inst.query) == out.witness.has_value(),
                 inst.label + ": branch disagrees with Fourier-Motzkin");
      }
    }
    c.expect(oracle > 0 && witnesses > 0 && violations > 0, "random instances did not cover every case");
  }

  void criterion_fixtures(Check& c) {
    Group Z   = make_group("Z");
    auto  alt = windowed_alternative(half_space(Z, {1}), query({z(0), z(1), z(-1)}, 10));
    c.expect(alt.witness.has_value(), "Z half-line: no witness");
    if (alt.witness) {
      auto r = verify_certificate(*alt.witness);
      for (char const* s : {"sum[e]", "sum[x]", "sum[x^-1]"}) {
        c.expect(r.quantity(s) && *r.quantity(s) == 1, std::string("Z half-line: ") + s + " != 1");
      }
    }

    FreeFixture fx;
    auto const& G = fx.G;
    auto        v = windowed_alternative(fx.f, query({G.identity(), G.inverse(fx.a), G.inverse(fx.b)}, 4));
    c.expect(v.violation.has_value(), "F2 semigroup: no violation");
    if (v.violation) {
      std::vector<std::pair<Rational, Element>> expected{{1, G.identity()}, {-1, fx.a}, {-1, fx.b}};
      std::sort(expected.begin(), expected.end(),
                [](auto const& x, auto const& y) { return x.second < y.second; });
      c.expect(v.violation->items == expected, "F2 semigroup: not scaled to (1,e),(-1,a),(-1,b)");
      auto r = structural_verify_semigroup_violation(*v.violation);
      c.expect(r.passed && r.level == VerificationLevel::structural, "F2 semigroup: structural upgrade fails");
    }
    auto w = windowed_alternative(fx.f, query({G.identity(), fx.a, fx.b}, 4));
    c.expect(w.witness && verify_certificate(*w.witness).passed, "F2 semigroup with S = {e,a,b}: no witness");
  }

  void criterion_duality(Check& c) {
    FreeFixture fx;
    auto const& G  = fx.G;
    auto        qs = query({G.identity(), G.inverse(fx.a), G.inverse(fx.b)}, 4);
    auto        d  = ratio_defect_lp(fx.f, qs);
    c.expect(d.lambda >= q(1, 3), "lambda* < 1/3");
    auto v = windowed_alternative(fx.f, qs);
    if (!v.violation) {
      c.expect(false, "no stored violation");
      return;
    }
    Rational sum = 0, mass = 0;
    for (auto const& [t, g] : v.violation->items) {
      sum += t;
      mass += abs_value(t);
    }
    c.expect(d.lambda >= abs_value(sum) / mass, "lambda* < |sum t| / sum |t|");
    RatioWitness rw{fx.f, qs.test_set, d.lambda, d.u, true, 1, {}};
    c.expect(verify_certificate(rw).passed, "returned u does not attain lambda*");
  }

  void criterion_defects(Check& c) {
    std::mt19937 rng(4242);
    int          compared = 0;
    for (int trial = 0; compared < 50 && trial < 500; ++trial) {
      auto inst          = testing::random_instance(rng, 3, 2);
      auto small         = inst.query;
      auto large         = inst.query;
      small.window_radius = 2;
      large.window_radius = 4;
      RatioDefect  rs{0, Weight(inst.group), {}};
      ReiterDefect es{0, Weight(inst.group)};
      try {
        rs = ratio_defect_lp(inst.f, small);
        es = reiter_defect_lp(inst.f, small);
      } catch (PreconditionError const&) {
        continue;  // f vanishes on the small window
      }
      auto rl = ratio_defect_lp(inst.f, large);
      auto el = reiter_defect_lp(inst.f, large);
      ++compared;
      c.expect(es.epsilon >= rs.lambda, inst.label + ": Reiter < ratio on B_2");
      c.expect(el.epsilon >= rl.lambda, inst.label + ": Reiter < ratio on B_4");
      c.expect(rl.lambda <= rs.lambda, inst.label + ": ratio defect grew with the window");
      c.expect(el.epsilon <= es.epsilon, inst.label + ": Reiter defect grew with the window");
    }
    c.expect(compared == 50, "fewer than 50 usable fixtures");
  }

  void criterion_jenkins(Check& c) {
    Group Z  = make_group("Z");
    auto  J  = jenkins_weight({Z, {z(1)}, q(1, 2), 20, std::nullopt});
    c.expect(J.base == q(2, 3), "r != 2/3");
    c.expect(J.pointwise.passed, "Z interior pointwise bound fails");
    Group Z2 = make_group("Z^2");
    bool  verified = false;
    for (std::size_t N : {40u, 80u, 120u}) {
      auto J2 = jenkins_weight({Z2, Z2.parse_elements("x,y"), q(1, 10), N, std::nullopt});
      c.expect(J2.pointwise.passed, "Z^2 pointwise bound fails at N = " + std::to_string(N));
      auto const* d = J2.reiter.quantity("relative_defect");
      if (J2.reiter.passed && d && *d <= q(1, 10)) {
        verified = true;
        break;
      }
    }
    c.expect(verified, "no N <= 120 gives a verified Reiter defect <= 1/10 on Z^2");
  }

  void criterion_freeness(Check& c) {
    FreeFixture fx;
    c.expect(free_to_depth(fx.G, fx.a, fx.b, 10).free, "(a, b) in F2 not free to depth 10");
    Group LL = make_group("LL");
    c.expect(free_to_depth(LL, LL.parse_element("t"), LL.parse_element("a*t"), 10).free,
             "(t, a t) in LL not free to depth 10");
    Group Z2 = make_group("Z^2");
    auto  B  = ball(Z2, 2).elements();
    for (std::size_t i = 0; i < B.size(); ++i) {
      for (std::size_t j = 0; j < B.size(); ++j) {
        if (i != j) {
          c.expect(!free_to_depth(Z2, B[i], B[j], 2).free,
                   "Z^2 pair " + Z2.format(B[i]) + ", " + Z2.format(B[j]) + " free to depth 2");
        }
      }
    }
  }

  void criterion_lp(Check& c) {
    std::mt19937 rng(9090);
    for (int trial = 0; trial < 200; ++trial) {
      auto p  = testing::random_problem(rng);
      auto o  = lp::solve(p);
      auto fm = testing::fm_solve(p);
      std::string tag = "LP " + std::to_string(trial);
      c.expect(o.status == fm.status, tag + ": status differs from Fourier-Motzkin");
      if (o.status == lp::Status::optimal && fm.value) {
        c.expect(o.objective_value == *fm.value, tag + ": optimum differs");
        c.expect(testing::strong_duality(p, o), tag + ": strong duality fails");
      }
      c.expect(lp::check_outcome(p, o).empty(), tag + ": outcome check fails");
    }
  }

  void criterion_moore(Check& c) {
    Group Z = make_group("Z");
    c.expect(moore_gap(half_space(Z, {1}), {z(1)}, ball(Z, 3)).value == 1, "Z probe value != 1");
    Group F2  = make_group("F2");
    auto  Ea  = PredicateRegistry().make(F2, "a-prefix");
    auto  gap = moore_gap(Ea, ball(F2, 2).elements(), ball(F2, 4));
    c.expect(gap.value < 1, "F2 probe value not < 1");
  }

  void criterion_reproducibility(Check& c) {
    std::vector<std::vector<std::string>> commands{
        {"alternative", "--group", "Z", "--f", "half:Z:1", "--set", "e,x,x^-1", "--window", "10", "--json"},
        {"alternative", "--group", "F2", "--f", "semigroup:a,b", "--set", "e,a^-1,b^-1", "--window", "4", "--json"},
        {"alternative", "--group", "F2", "--f", "semigroup:a,b", "--set", "e,a,b", "--window", "4", "--json"},
        {"jenkins", "--group", "Z", "--epsilon", "1/2", "--radius", "20", "--json"},
        {"jenkins", "--group", "Z^2", "--epsilon", "1/10", "--radius", "80", "--json"},
        {"moore-gap", "--group", "Z", "--f", "half:Z:1", "--translates", "x", "--window", "3", "--json"},
        {"moore-gap", "--group", "F2", "--f", "custom:a-prefix", "--translate-radius", "2", "--window", "4",
         "--json"},
    };
    std::vector<std::string> outputs;
    for (auto const& cmd : commands) {
      auto first  = run_cli(cmd);
      auto second = run_cli(cmd);
      c.expect(!first.empty() && first == second, cmd[0] + " " + cmd[2] + ": output differs between runs");
      outputs.push_back(first);
    }
    // Certificates among them: re-verify, then tamper.
    for (std::size_t i = 0; i < 5; ++i) {
      auto j = Json::parse(outputs[i]);
      c.expect(verify_json(j).passed, "fixture " + std::to_string(i) + " does not re-verify");
      if (j["kind"] == "translate_violation") {
        tamper_each(c, j, "items", "t", "violation");
      } else {
        tamper_each(c, j, "u", "value", std::string(j["kind"]), i == 4 ? 997 : 1);
      }
    }
  }

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "ball counts", 5, criterion_balls},
      {2, "growth trend", 5, criterion_growth},
      {3, "Farkas alternative exclusivity", 60, criterion_alternative},
      {4, "canonical fixtures", 10, criterion_fixtures},
      {5, "weak duality", 10, criterion_duality},
      {6, "defect ordering and window monotonicity", 60, criterion_defects},
      {7, "Jenkins weights", 30, criterion_jenkins},
      {8, "freeness obstructions", 10, criterion_freeness},
      {9, "LP kernel against Fourier-Motzkin", 60, criterion_lp},
      {10, "Moore probe", 20, criterion_moore},
      {11, "reproducibility and tamper evidence", 120, criterion_reproducibility},
  };
  int failed = 0;
  for (auto const& cr : criteria) {
    Check c;
    auto  start = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (std::exception const& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.budget_seconds) {
      c.failures.push_back("took " + std::to_string(secs) + " s, budget " + std::to_string(cr.budget_seconds));
    }
    bool pass = c.failures.empty();
    failed += pass ? 0 : 1;
    std::printf("criterion %2d %s  %s (%.2f s)\n", cr.number, pass ? "PASS" : "FAIL", cr.title.c_str(), secs);
    for (std::size_t i = 0; i < c.failures.size() && i < 5; ++i) {
      std::printf("    %s\n", c.failures[i].c_str());
    }
  }
  return failed == 0 ? 0 : 1;
}
