#pragma once

#include <random>
#include <vector>

#include "conelab/functions.hpp"
#include "conelab/group.hpp"

namespace conelab::testing {

  inline Element random_element(Group const& G, std::mt19937& rng, int max_len = 6) {
    auto const&                     gens = G.generators();
    std::uniform_int_distribution<> len(0, max_len);
    std::uniform_int_distribution<> pick(0, static_cast<int>(gens.size()) - 1);
    Element                         g = G.identity();
    for (int i = len(rng); i > 0; --i) {
      g = G.multiply(g, gens[pick(rng)]);
    }
    return g;
  }

  // Small random weight with entries in [-q, q] / den.
  inline Weight random_weight(Group const& G, std::mt19937& rng, int terms = 4, int max_len = 4,
                              bool nonnegative = false) {
    std::uniform_int_distribution<> num(nonnegative ? 1 : -6, 6);
    std::uniform_int_distribution<> den(1, 4);
    Weight                          u(G);
    for (int i = 0; i < terms; ++i) {
      Rational v(num(rng), den(rng));
      v.canonicalize();
      u.add(random_element(G, rng, max_len), v);
    }
    return u;
  }

  // All nonempty words in {a, b} of length <= depth, as a key set.
  inline std::vector<Element> semigroup_words(Group const& G, Element const& a, Element const& b,
                                              int depth) {
    std::vector<Element> all;
    std::vector<Element> frontier{a, b};
    for (int d = 1; d <= depth; ++d) {
      std::vector<Element> next;
      for (auto const& w : frontier) {
        all.push_back(w);
        if (d < depth) {
          next.push_back(G.multiply(w, a));
          next.push_back(G.multiply(w, b));
        }
      }
      frontier = std::move(next);
    }
    return all;
  }

}  // namespace conelab::testing
