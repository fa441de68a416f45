#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "conelab/group.hpp"

namespace conelab {

  // Element-count limit used when the caller does not pass one.  Reads the
  // CONELAB_CAP environment variable, defaulting to 4'000'000.
  std::size_t default_ball_cap();

  // Closes `S` under inverses, dropping duplicates and the identity, keeping
  // first-occurrence order.
  std::vector<Element> symmetrize(Group const& G, std::span<Element const> S);

  // Breadth-first spheres of the word metric over S u S^-1.
  struct BallTable {
    std::vector<Element>              generating_set;  // symmetrised
    std::size_t                       radius = 0;
    std::vector<std::vector<Element>> layers;          // sorted by key
    std::unordered_map<std::string, std::size_t> lengths;

    std::size_t size() const noexcept {
      return lengths.size();
    }

    bool contains(Element const& g) const {
      return lengths.count(g.key()) > 0;
    }

    std::optional<std::size_t> length_of(Element const& g) const;

    // All elements, layer by layer.
    std::vector<Element> elements() const;
  };

  // Throws CapExceeded if the ball would hold more than `cap` elements.
  BallTable ball(Group const&             G,
                 std::span<Element const> S,
                 std::size_t              radius,
                 std::size_t              cap = default_ball_cap());

  // Ball over the group's default generators.
  BallTable ball(Group const& G, std::size_t radius, std::size_t cap = default_ball_cap());

  enum class GrowthTrend { polynomial_like, exponential_like, inconclusive };

  char const* to_string(GrowthTrend t);

  struct GrowthReport {
    std::vector<std::size_t> sizes;   // |B_0| .. |B_N| (fewer if truncated)
    std::vector<Rational>    ratios;  // |B_{n+1}| / |B_n|
    GrowthTrend              trend     = GrowthTrend::inconclusive;
    bool                     truncated = false;
  };

  // The trend label is a heuristic: polynomial-like when the last three
  // ratios are <= 1 + 4/N, exponential-like when all three are >= 5/4.
  GrowthReport growth_report(Group const&             G,
                             std::span<Element const> S,
                             std::size_t              N,
                             std::size_t              cap = default_ball_cap());

  // |S^n| for n = 0..N, where S^n is the set of n-fold products of the
  // (unsymmetrised) list S and S^0 = {e}.
  std::vector<std::size_t> product_set_sizes(Group const&             G,
                                             std::span<Element const> S,
                                             std::size_t              N,
                                             std::size_t              cap = default_ball_cap());

}  // namespace conelab
