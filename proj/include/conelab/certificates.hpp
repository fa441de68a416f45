#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "conelab/ball.hpp"
#include "conelab/functions.hpp"
#include "conelab/group.hpp"
#include "conelab/rational.hpp"

namespace conelab {

  // Violations are checked on a window or structurally; witnesses and
  // freeness records are finite objects and always checked in full.
  enum class VerificationLevel { window, structural, global };

  char const* to_string(VerificationLevel level);

  // Claims sum_i t_i f(g_i^-1 x) >= 0 for every x, with sum_i t_i < 0.
  struct TranslateViolation {
    TestFunction                              f;
    std::vector<std::pair<Rational, Element>> items;
    std::size_t                               window_radius = 0;
    VerificationLevel                         level         = VerificationLevel::window;  // claimed
    std::vector<std::string>                  provenance;
  };

  // Two-sided: (1-eps)^p <= sum_x u(x)^p f(s x)^p <= (1+eps)^p for s in S.
  // One-sided: the upper bound only, strict.  Normalised so that
  // sum_x u(x)^p f(x)^p = 1.
  struct RatioWitness {
    TestFunction             f;
    std::vector<Element>     test_set;
    Rational                 epsilon;
    Weight                   u;
    bool                     two_sided = true;
    unsigned                 p         = 1;
    std::vector<std::string> provenance;
  };

  // sum_x |u(s^-1 x) - u(x)|^p f(x)^p < eps^p * sum_x u(x)^p f(x)^p for s in S.
  struct ReiterWitness {
    TestFunction             f;
    std::vector<Element>     test_set;
    Rational                 epsilon;
    Weight                   u;
    unsigned                 p = 1;
    std::vector<std::string> provenance;
  };

  // Words over {a, b} are strings of the letters 'a' and 'b'.
  struct FreenessWitness {
    Group                                              group;
    Element                                            a;
    Element                                            b;
    std::size_t                                        depth = 0;
    bool                                               free  = false;
    std::optional<std::pair<std::string, std::string>> collision;
  };

  using Certificate = std::variant<RatioWitness, ReiterWitness, TranslateViolation, FreenessWitness>;

  struct VerificationReport {
    bool                                          passed = false;
    VerificationLevel                             level  = VerificationLevel::window;
    std::vector<std::pair<std::string, Rational>> quantities;
    std::vector<std::string>                      failures;
    std::optional<Element>                        counterexample;

    Rational const* quantity(std::string const& name) const;
  };

  // Group of the certificate (the test function's group for the others).
  Group const& certificate_group(Certificate const& c);
  char const*  certificate_kind(Certificate const& c);

  // Witness checks are finite sums and conclusive.  A violation is checked
  // at every x of the ball of radius `window_radius` (default: the radius
  // stored in the certificate) and never reaches the structural level here.
  VerificationReport verify_certificate(Certificate const&         c,
                                        std::optional<std::size_t> window_radius = std::nullopt);

  // Upgrades a window-valid semigroup violation (items (1,e),(-1,a),(-1,b) up
  // to positive scaling, f the indicator of the semigroup generated by a, b
  // or its zero extension) to the structural level.  Throws
  // PreconditionError on a pattern mismatch or when freeness to depth R + 1
  // fails, R being the certificate's window radius.
  VerificationReport structural_verify_semigroup_violation(TranslateViolation const& c);

  // Compares all 2^(N+1) - 2 nonempty words of length <= N.  Throws
  // CapExceeded if that exceeds `cap`.
  FreenessWitness free_to_depth(Group const&   G,
                                Element const& a,
                                Element const& b,
                                std::size_t    N,
                                std::size_t    cap = default_ball_cap());

  // Scales to sum t = -1, merges repeated elements, drops zeros and sorts
  // by canonical key.  Throws PreconditionError if sum t >= 0.
  TranslateViolation canonicalize(TranslateViolation v);

  // ---------------------------------------------------------------- JSON

  using Json = nlohmann::ordered_json;

  // Fixed field order; elements as words, rationals as "p/q".  Throws
  // UnsupportedError if the test function has no spec string.
  Json        to_json(Certificate const& c, VerificationReport const& report);
  std::string serialize(Certificate const& c, VerificationReport const& report);

  struct LoadedCertificate {
    Certificate certificate;
    Json        stored_verification;
  };

  LoadedCertificate certificate_from_json(Json const&              j,
                                          PredicateRegistry const& registry = PredicateRegistry());

  // Re-verifies at the stored level and window, then requires the stored
  // verification block (passed flag and every quantity) to match the
  // recomputation exactly.
  VerificationReport verify_json(Json const&              j,
                                 PredicateRegistry const& registry = PredicateRegistry());

}  // namespace conelab
