#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "conelab/ball.hpp"
#include "conelab/certificates.hpp"
#include "conelab/functions.hpp"
#include "conelab/group.hpp"
#include "conelab/rational.hpp"

namespace conelab {

  struct QuerySpec {
    std::vector<Element> test_set;  // identity first
    Rational             epsilon = 1;
    std::size_t          window_radius = 0;
    std::vector<Element> window_generators;  // empty: the group's generators

    // Throws PreconditionError on a missing leading identity, duplicates,
    // foreign elements or epsilon <= 0.
    void validate(Group const& G) const;

    BallTable window(Group const& G) const;
  };

  struct AlternativeOutcome {
    std::optional<RatioWitness>       witness;    // epsilon 0, two-sided
    std::optional<TranslateViolation> violation;  // window level, canonical
    std::vector<std::string>          trace;      // LP dumps, when requested
  };

  // Decides whether sum_x c_x f(s x) = 1 for all s in S has a solution
  // c >= 0 supported in the window.  If not, the separating vector tau with
  // sum_s tau_s f(s x) <= 0 on W and sum tau = 1 of least l1 norm gives the
  // violation (-tau_s, s^-1).
  AlternativeOutcome windowed_alternative(TestFunction const& f,
                                          QuerySpec const&    q,
                                          bool                trace = false);

  struct RatioDefect {
    Rational              lambda;
    Weight                u;
    std::vector<Rational> dual;  // one entry per LP row
  };

  // min lambda subject to |sum_x u(x) f(s x) - 1| <= lambda (only the upper
  // side when one_sided), sum u f = 1, u >= 0 on the window.
  RatioDefect ratio_defect_lp(TestFunction const& f, QuerySpec const& q, bool one_sided = false);

  struct ReiterDefect {
    Rational epsilon;
    Weight   u;
  };

  // min max_s sum_x |u(s^-1 x) - u(x)| f(x) subject to sum u f = 1, u >= 0
  // on the window.
  ReiterDefect reiter_defect_lp(TestFunction const& f, QuerySpec const& q);

  struct MooreGap {
    Rational              value;
    std::vector<Rational> t;  // one entry per element of T
  };

  // min over t of max_{x in W} |1 - sum_g t_g (E(x) - E(g^-1 x))|.  E must
  // take values in {0, 1} on the points the LP reads.
  MooreGap moore_gap(TestFunction const& E, std::vector<Element> const& T, BallTable const& window);

  // Pairs (a, b) from the radius-two ball, in (length, key) order with a
  // before b, that pass free_to_depth(N).  At most `limit` are returned.
  std::vector<FreenessWitness> find_free_pairs(Group const&                G,
                                               std::vector<Element> const& S,
                                               std::size_t                 N,
                                               std::size_t                 limit,
                                               std::size_t                 cap = default_ball_cap());

}  // namespace conelab
