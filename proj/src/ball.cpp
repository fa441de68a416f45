#include "conelab/ball.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_set>

#include "conelab/errors.hpp"

namespace conelab {

  std::size_t default_ball_cap() {
    if (char const* env = std::getenv("CONELAB_CAP")) {
      char*              end   = nullptr;
      unsigned long long value = std::strtoull(env, &end, 10);
      if (end != env && *end == '\0' && value > 0) {
        return static_cast<std::size_t>(value);
      }
    }
    return 4'000'000;
  }

  std::vector<Element> symmetrize(Group const& G, std::span<Element const> S) {
    std::vector<Element>            out;
    std::unordered_set<std::string> seen{G.identity().key()};
    auto                            add = [&](Element const& g) {
      if (seen.insert(g.key()).second) {
        out.push_back(g);
      }
    };
    for (auto const& s : S) {
      add(s);
      add(G.inverse(s));
    }
    return out;
  }

  std::optional<std::size_t> BallTable::length_of(Element const& g) const {
    auto it = lengths.find(g.key());
    if (it == lengths.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  std::vector<Element> BallTable::elements() const {
    std::vector<Element> out;
    out.reserve(size());
    for (auto const& layer : layers) {
      out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
  }

  BallTable ball(Group const& G, std::span<Element const> S, std::size_t radius, std::size_t cap) {
    if (S.empty()) {
      throw PreconditionError("ball needs a nonempty generating set");
    }
    BallTable table;
    table.generating_set = symmetrize(G, S);
    table.radius         = radius;
    Element e            = G.identity();
    table.layers.push_back({e});
    table.lengths.emplace(e.key(), 0);
    for (std::size_t n = 1; n <= radius; ++n) {
      std::vector<Element> next;
      for (auto const& g : table.layers.back()) {
        for (auto const& s : table.generating_set) {
          Element h = G.multiply(g, s);
          if (table.lengths.emplace(h.key(), n).second) {
            next.push_back(std::move(h));
            if (table.lengths.size() > cap) {
              throw CapExceeded("ball of radius " + std::to_string(radius) + " in "
                                + G.spec() + " exceeds the cap of " + std::to_string(cap)
                                + " elements");
            }
          }
        }
      }
      std::sort(next.begin(), next.end());
      table.layers.push_back(std::move(next));
    }
    return table;
  }

  BallTable ball(Group const& G, std::size_t radius, std::size_t cap) {
    return ball(G, G.generators(), radius, cap);
  }

  char const* to_string(GrowthTrend t) {
    switch (t) {
      case GrowthTrend::polynomial_like:
        return "polynomial-like";
      case GrowthTrend::exponential_like:
        return "exponential-like";
      default:
        return "inconclusive";
    }
  }

  GrowthReport growth_report(Group const& G, std::span<Element const> S, std::size_t N, std::size_t cap) {
    if (N < 2) {
      throw PreconditionError("growth report needs N >= 2");
    }
    GrowthReport report;
    // Grow the ball one layer at a time so that a cap hit keeps the prefix.
    std::vector<Element>            gens = symmetrize(G, S);
    std::unordered_set<std::string> seen{G.identity().key()};
    std::vector<Element>            layer{G.identity()};
    report.sizes.push_back(1);
    for (std::size_t n = 1; n <= N && !report.truncated; ++n) {
      std::vector<Element> next;
      for (auto const& g : layer) {
        for (auto const& s : gens) {
          Element h = G.multiply(g, s);
          if (seen.insert(h.key()).second) {
            next.push_back(std::move(h));
          }
        }
        if (seen.size() > cap) {
          report.truncated = true;
          break;
        }
      }
      if (!report.truncated) {
        report.sizes.push_back(seen.size());
        layer = std::move(next);
      }
    }
    for (std::size_t n = 0; n + 1 < report.sizes.size(); ++n) {
      report.ratios.emplace_back(Integer(static_cast<unsigned long>(report.sizes[n + 1])),
                                 Integer(static_cast<unsigned long>(report.sizes[n])));
      report.ratios.back().canonicalize();
    }
    if (report.truncated || report.ratios.size() < 3) {
      return report;
    }
    Rational const poly_threshold = 1 + Rational(4, static_cast<unsigned long>(N));
    Rational const exp_threshold(5, 4);
    auto           last = report.ratios.end() - 3;
    if (std::all_of(last, report.ratios.end(), [&](auto const& r) { return r <= poly_threshold; })) {
      report.trend = GrowthTrend::polynomial_like;
    } else if (std::all_of(last, report.ratios.end(),
                           [&](auto const& r) { return r >= exp_threshold; })) {
      report.trend = GrowthTrend::exponential_like;
    }
    return report;
  }

  std::vector<std::size_t> product_set_sizes(Group const& G, std::span<Element const> S, std::size_t N, std::size_t cap) {
    std::vector<std::size_t> sizes{1};
    std::vector<Element>     current{G.identity()};
    for (std::size_t n = 1; n <= N; ++n) {
      std::unordered_set<std::string> seen;
      std::vector<Element>            next;
      for (auto const& g : current) {
        for (auto const& s : S) {
          Element h = G.multiply(g, s);
          if (seen.insert(h.key()).second) {
            next.push_back(std::move(h));
            if (seen.size() > cap) {
              throw CapExceeded("S^" + std::to_string(n) + " exceeds the cap");
            }
          }
        }
      }
      sizes.push_back(next.size());
      current = std::move(next);
    }
    return sizes;
  }

}  // namespace conelab
