#pragma once

// Random (f, S, W) instances over the catalog groups and an exhaustive
// reference for the membership system of the windowed alternative.

#include <random>
#include <set>
#include <string>
#include <vector>

#include "conelab/functions.hpp"
#include "conelab/search.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace conelab::testing {

  struct Instance {
    Group        group;
    TestFunction f;
    QuerySpec    query;
    std::string  label;
  };

  inline TestFunction random_function(Group const& G, std::mt19937& rng) {
    std::uniform_int_distribution<> pick(0, 5);
    auto const&                     gens = G.generators();
    switch (pick(rng)) {
      case 0:
        if (G.kind() == GroupKind::integer_lattice) {
          std::uniform_int_distribution<> c(-2, 2);
          std::vector<std::int64_t>       normal(static_cast<std::size_t>(G.parameter()));
          for (auto& v : normal) {
            v = c(rng);
          }
          if (normal[0] == 0) {
            normal[0] = 1;
          }
          return half_space(G, normal);
        }
        [[fallthrough]];
      case 1: {
        auto a = random_element(G, rng, 2);
        auto b = random_element(G, rng, 2);
        if (a == G.identity() || a == b) {
          a = gens[0];
          b = gens.size() > 1 ? gens[1] : G.power(gens[0], 2);
        }
        return semigroup_indicator(G, a, b);
      }
      case 2: {
        std::uniform_int_distribution<> r(0, 2);
        return ball_indicator(G, gens, static_cast<std::size_t>(r(rng)));
      }
      case 3: {
        std::uniform_int_distribution<> v(1, 3);
        return constant_function(G, v(rng));
      }
      default: {
        // A small finite-support function with random values.
        std::uniform_int_distribution<> n(1, 4), v(1, 3);
        std::map<Element, Rational>     values;
        for (int i = n(rng); i > 0; --i) {
          values[random_element(G, rng, 3)] = v(rng);
        }
        return custom_function(
            G, "finite",
            [values](Element const& x) {
              auto it = values.find(x);
              return it == values.end() ? Rational(0) : it->second;
            },
            3);
      }
    }
  }

  inline std::vector<std::string> catalog_specs() {
    return {"Z", "Z^2", "F2", "LL", "BS1_2", "Dinf"};
  }

  // |S| <= max_set (identity first), window radius in [1, max_radius].
  inline Instance random_instance(std::mt19937& rng, std::size_t max_set = 4,
                                  std::size_t max_radius = 4) {
    auto                            specs = catalog_specs();
    std::uniform_int_distribution<> g(0, static_cast<int>(specs.size()) - 1);
    std::uniform_int_distribution<> sz(1, static_cast<int>(max_set));
    std::uniform_int_distribution<> rad(1, static_cast<int>(max_radius));
    Group                           G = make_group(specs[static_cast<std::size_t>(g(rng))]);
    QuerySpec                       q;
    q.test_set = {G.identity()};
    std::set<std::string> keys{G.identity().key()};
    int const             want = sz(rng);
    for (int tries = 0; static_cast<int>(q.test_set.size()) < want && tries < 50; ++tries) {
      auto s = random_element(G, rng, 2);
      if (keys.insert(s.key()).second) {
        q.test_set.push_back(s);
      }
    }
    q.window_radius = static_cast<std::size_t>(rad(rng));
    // Keep free-group windows small enough for the dense tableau.
    if (G.kind() == GroupKind::free_group && q.window_radius > 3) {
      q.window_radius = 3;
    }
    auto f = random_function(G, rng);
    return {G, f, q, G.spec() + " " + f.spec() + " R=" + std::to_string(q.window_radius)};
  }

  // Feasibility of sum_x c_x f(s x) = 1 (s in S), c >= 0 on W, decided by
  // elimination without the simplex code.
  inline bool membership_feasible(TestFunction const& f, QuerySpec const& q) {
    auto const& G = f.group();
    auto const  W = q.window(G).elements();
    std::size_t const n = W.size();
    System sys;
    for (auto const& s : q.test_set) {
      Halfspace h{std::vector<Rational>(n), Rational(1), 0};
      for (std::size_t x = 0; x < n; ++x) {
        h.a[x] = f(G.multiply(s, W[x]));
      }
      sys.eq.push_back(h);
    }
    for (std::size_t x = 0; x < n; ++x) {
      Halfspace h{std::vector<Rational>(n), Rational(0), 0};
      h.a[x] = -1;
      sys.ineq.push_back(h);
    }
    return fm_feasible(std::move(sys), n);
  }

}  // namespace conelab::testing
