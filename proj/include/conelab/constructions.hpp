#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conelab/ball.hpp"
#include "conelab/certificates.hpp"
#include "conelab/functions.hpp"
#include "conelab/group.hpp"
#include "conelab/rational.hpp"

namespace conelab {

  struct JenkinsSpec {
    Group                   group;
    std::vector<Element>    S;  // symmetrised by jenkins_weight
    Rational                epsilon;
    std::size_t             radius = 1;
    std::optional<Rational> base;  // default 1 / (1 + epsilon)

    // Throws PreconditionError unless epsilon > 0, radius >= 1 and the base
    // r lies in (0, 1] with max(1/r - 1, 1 - r) <= epsilon.
    Rational resolved_base() const;
  };

  struct JenkinsResult {
    Weight             rho;   // r^|g| on B_N, zero outside
    Rational           base;
    // |rho(s^-1 g) - rho(g)| <= eps rho(g) and |rho(g s) - rho(g)| <= eps rho(g)
    // at every g of B_{N-1} and s in S.
    VerificationReport pointwise;
    // The exact l1 Reiter defect of rho for f = 1 and the symmetrised S,
    // boundary loss included.
    VerificationReport reiter;
  };

  JenkinsResult jenkins_weight(JenkinsSpec const& spec, std::size_t cap = default_ball_cap());

  struct TildeCoefficients {
    std::vector<Rational> values;
    Rational              sum;
    bool                  preserves_violation = false;  // sum t < 0 and sum t~ < 0
  };

  // t~_i = (1 + eps) t_i for t_i > 0 and (1 - eps) t_i otherwise.  Throws
  // PreconditionError unless 0 < eps < 1.
  TildeCoefficients tilde_coefficients(std::vector<Rational> const& t, Rational const& epsilon);

  struct SmoothingFailure {
    Element     x;
    std::string what;
  };

  struct SmoothingReport {
    bool                          passed  = false;
    std::size_t                   checked = 0;
    std::vector<SmoothingFailure> failures;
  };

  // For each h in h_list and each x in the window checks
  //   (1 - eps) (rho f)(x) <= ((rho h) f)(x) <= (1 + eps) (rho f)(x)
  // and ((rho h) f)(x) = (rho (h f))(x), where (rho h)(y) = rho(y h^-1) and
  // rho lives on the right factor H of f's group G x H.
  SmoothingReport product_smoothing_check(Weight const&               rho,
                                          std::vector<Element> const& S,
                                          TestFunction const&         f,
                                          std::vector<Element> const& h_list,
                                          Rational const&             epsilon,
                                          BallTable const&            window);

  // Moves a certificate about f on H to one about the zero extension of f
  // on G.  The identity embedding returns the certificate unchanged.
  Certificate transport_subgroup(Certificate const& c, Embedding const& embedding);

  enum class FiniteTransport { finite_index_dominator, finite_normal_average };

  // Both kinds return orbit_sum(v, elements).  The normal average also
  // requires r * elements == elements for every listed r, so that the
  // result is invariant under each of them.
  Weight       finite_transport(FiniteTransport kind, Weight const& v, std::vector<Element> const& elements);
  TestFunction finite_transport(FiniteTransport kind, TestFunction const& f, std::vector<Element> const& elements);

}  // namespace conelab
