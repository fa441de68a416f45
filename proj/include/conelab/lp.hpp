#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conelab/rational.hpp"

namespace conelab::lp {

  enum class Relation { less_equal, equal, greater_equal };
  enum class Sense { minimize, maximize };
  enum class Status { optimal, infeasible, unbounded };

  char const* to_string(Relation r);
  char const* to_string(Status s);

  struct Row {
    std::vector<std::pair<std::size_t, Rational>> terms;  // (variable, coefficient)
    Relation                                      relation = Relation::less_equal;
    Rational                                      rhs;
  };

  // Variables are free unless bounded.
  struct Problem {
    std::size_t                          variables = 0;
    std::vector<Row>                     rows;
    std::vector<Rational>                objective;
    Sense                                sense = Sense::maximize;
    std::vector<std::optional<Rational>> lower;
    std::vector<std::optional<Rational>> upper;

    std::size_t add_variable(Rational cost = 0,
                             std::optional<Rational> lo = std::nullopt,
                             std::optional<Rational> hi = std::nullopt);
    // Sparse row; repeated indices are summed.
    void add_row(std::vector<std::pair<std::size_t, Rational>> terms, Relation rel, Rational rhs);
    // Dense row, one coefficient per variable.
    void add_dense_row(std::vector<Rational> const& coefficients, Relation rel, Rational rhs);
  };

  // Optimal: primal, dual (per row), reduced_costs (per variable) with
  //   objective = sum_i dual_i * row_i + reduced_costs,
  // and objective_value == dual_value.
  //
  // Infeasible: farkas holds one multiplier per row for the row written as
  // ">=" (a "<=" row a.x <= b is read as -a.x >= -b).  Multipliers of
  // inequality rows are nonnegative, and the combined inequality g.x >= beta
  // has sup{g.x : lower <= x <= upper} < beta.  The vector is scaled to a
  // primitive integer vector.
  //
  // Unbounded: primal is feasible and primal + s * ray stays feasible for
  // every s >= 0 while the objective strictly improves.
  struct Outcome {
    Status                status = Status::infeasible;
    std::vector<Rational> primal;
    std::vector<Rational> dual;
    std::vector<Rational> reduced_costs;
    Rational              objective_value;
    Rational              dual_value;
    std::vector<Rational> farkas;
    std::vector<Rational> ray;
    std::size_t           pivots = 0;
  };

  // Two-phase primal simplex on a dense exact tableau with Bland's rule.
  // Deterministic; throws PreconditionError on dimension mismatches.
  Outcome solve(Problem const& problem);

  // Re-checks every claim of `outcome` against `problem` exactly.  Returns an
  // empty string on success, otherwise a description of the first failure.
  std::string check_outcome(Problem const& problem, Outcome const& outcome);

  // Line-oriented text dumps with p/q rationals.
  std::string dump(Problem const& problem);
  std::string dump(Outcome const& outcome);

}  // namespace conelab::lp
