#include "conelab/lp.hpp"

#include <algorithm>
#include <sstream>

#include "conelab/errors.hpp"

namespace conelab::lp {

  char const* to_string(Relation r) {
    switch (r) {
      case Relation::less_equal:
        return "<=";
      case Relation::equal:
        return "=";
      case Relation::greater_equal:
        return ">=";
    }
    return "?";
  }

  char const* to_string(Status s) {
    switch (s) {
      case Status::optimal:
        return "optimal";
      case Status::infeasible:
        return "infeasible";
      case Status::unbounded:
        return "unbounded";
    }
    return "?";
  }

  std::size_t Problem::add_variable(Rational cost, std::optional<Rational> lo,
                                    std::optional<Rational> hi) {
    objective.push_back(std::move(cost));
    lower.push_back(std::move(lo));
    upper.push_back(std::move(hi));
    return variables++;
  }

  void Problem::add_row(std::vector<std::pair<std::size_t, Rational>> terms, Relation rel,
                        Rational rhs) {
    std::sort(terms.begin(), terms.end(),
              [](auto const& a, auto const& b) { return a.first < b.first; });
    std::vector<std::pair<std::size_t, Rational>> merged;
    for (auto& [j, v] : terms) {
      if (j >= variables) {
        throw PreconditionError("row refers to variable " + std::to_string(j) + " of "
                                + std::to_string(variables));
      }
      if (!merged.empty() && merged.back().first == j) {
        merged.back().second += v;
      } else {
        merged.emplace_back(j, std::move(v));
      }
    }
    std::erase_if(merged, [](auto const& t) { return t.second == 0; });
    rows.push_back(Row{std::move(merged), rel, std::move(rhs)});
  }

  void Problem::add_dense_row(std::vector<Rational> const& coefficients, Relation rel,
                              Rational rhs) {
    if (coefficients.size() != variables) {
      throw PreconditionError("dimension mismatch: row of length "
                              + std::to_string(coefficients.size()) + " for "
                              + std::to_string(variables) + " variables");
    }
    std::vector<std::pair<std::size_t, Rational>> terms;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
      if (coefficients[j] != 0) {
        terms.emplace_back(j, coefficients[j]);
      }
    }
    add_row(std::move(terms), rel, std::move(rhs));
  }

  namespace {

    void validate(Problem const& p) {
      if (p.objective.size() != p.variables || p.lower.size() != p.variables
          || p.upper.size() != p.variables) {
        throw PreconditionError("dimension mismatch between variables, objective and bounds");
      }
      for (auto const& row : p.rows) {
        for (auto const& [j, v] : row.terms) {
          if (j >= p.variables) {
            throw PreconditionError("dimension mismatch: row refers to variable "
                                    + std::to_string(j));
          }
        }
      }
    }

    // Original variable x_j = offset + sum of sign * z_k over its columns.
    struct VariableMap {
      Rational                                 offset;
      std::vector<std::pair<std::size_t, int>> columns;
    };

    struct InternalRow {
      std::vector<std::pair<std::size_t, Rational>> terms;
      Relation                                      relation;
      Rational                                      rhs;
      int                                           sigma = 1;  // internal = sigma * original
    };

    class Tableau {
     public:
      Tableau(std::size_t rows, std::size_t cols)
          : m_(rows), n_(cols), cells_(rows, std::vector<Rational>(cols + 1)), cost_(cols + 1),
            basis_(rows) {}

      Rational& at(std::size_t i, std::size_t j) {
        return cells_[i][j];
      }

      Rational const& at(std::size_t i, std::size_t j) const {
        return cells_[i][j];
      }

      Rational& rhs(std::size_t i) {
        return cells_[i][n_];
      }

      std::size_t rows() const {
        return m_;
      }

      std::size_t cols() const {
        return n_;
      }

      std::vector<std::size_t>& basis() {
        return basis_;
      }

      std::vector<Rational>& cost() {
        return cost_;
      }

      // Reduced costs r_j = c_j - c_B B^-1 a_j for objective `c`.
      void price(std::vector<Rational> const& c) {
        for (std::size_t j = 0; j <= n_; ++j) {
          cost_[j] = j < n_ ? c[j] : Rational(0);
        }
        for (std::size_t i = 0; i < m_; ++i) {
          Rational const& cb = c[basis_[i]];
          if (cb == 0) {
            continue;
          }
          for (std::size_t j = 0; j <= n_; ++j) {
            if (cells_[i][j] != 0) {
              cost_[j] -= cb * cells_[i][j];
            }
          }
        }
      }

      void pivot(std::size_t r, std::size_t q) {
        auto& prow = cells_[r];
        Rational inv = 1 / prow[q];
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j <= n_; ++j) {
          if (prow[j] != 0) {
            prow[j] *= inv;
            nz.push_back(j);
          }
        }
        auto eliminate = [&](std::vector<Rational>& row) {
          if (row[q] == 0) {
            return;
          }
          Rational factor = row[q];
          for (auto j : nz) {
            row[j] -= factor * prow[j];
          }
        };
        for (std::size_t i = 0; i < m_; ++i) {
          if (i != r) {
            eliminate(cells_[i]);
          }
        }
        eliminate(cost_);
        basis_[r] = q;
      }

     private:
      std::size_t                        m_;
      std::size_t                        n_;
      std::vector<std::vector<Rational>> cells_;
      std::vector<Rational>              cost_;
      std::vector<std::size_t>           basis_;
    };

    enum class Run { optimal, unbounded };

    // Maximizes over columns below `allowed`, entering on the largest reduced
    // cost.  A run of degenerate pivots switches to Bland's rule until the
    // objective moves again, so the method cannot cycle.  On an unbounded
    // exit `entering` holds the improving column.
    Run simplex(Tableau& t, std::size_t allowed, std::size_t& pivots, std::size_t& entering) {
      constexpr std::size_t stall_limit = 8;
      std::size_t           stalled     = 0;
      while (true) {
        std::size_t q = allowed;
        for (std::size_t j = 0; j < allowed; ++j) {
          if (t.cost()[j] > 0 && (q == allowed || t.cost()[j] > t.cost()[q])) {
            q = j;
            if (stalled >= stall_limit) {
              break;
            }
          }
        }
        if (q == allowed) {
          return Run::optimal;
        }
        std::size_t r = t.rows();
        Rational    best;
        for (std::size_t i = 0; i < t.rows(); ++i) {
          if (t.at(i, q) <= 0) {
            continue;
          }
          Rational ratio = t.rhs(i) / t.at(i, q);
          if (r == t.rows() || ratio < best
              || (ratio == best && t.basis()[i] < t.basis()[r])) {
            r    = i;
            best = ratio;
          }
        }
        if (r == t.rows()) {
          entering = q;
          return Run::unbounded;
        }
        stalled = best == 0 ? stalled + 1 : 0;
        t.pivot(r, q);
        ++pivots;
      }
    }

  }  // namespace

  Outcome solve(Problem const& problem) {
    validate(problem);
    std::size_t const n = problem.variables;
    std::size_t const m = problem.rows.size();
    bool const        maximize = problem.sense == Sense::maximize;

    // Variables to nonnegative columns z.
    std::vector<VariableMap> vars(n);
    std::vector<InternalRow> rows;
    std::size_t              nz = 0;
    std::vector<std::pair<std::size_t, Rational>> bound_rows;  // (column, u - l)
    for (std::size_t j = 0; j < n; ++j) {
      auto const& lo = problem.lower[j];
      auto const& hi = problem.upper[j];
      if (lo) {
        vars[j].offset = *lo;
        vars[j].columns.emplace_back(nz, 1);
        if (hi) {
          bound_rows.emplace_back(nz, *hi - *lo);
        }
        ++nz;
      } else if (hi) {
        vars[j].offset = *hi;
        vars[j].columns.emplace_back(nz++, -1);
      } else {
        vars[j].columns.emplace_back(nz++, 1);
        vars[j].columns.emplace_back(nz++, -1);
      }
    }
    std::vector<Rational> cz(nz);
    for (std::size_t j = 0; j < n; ++j) {
      for (auto [k, s] : vars[j].columns) {
        cz[k] += (maximize ? 1 : -1) * s * problem.objective[j];
      }
    }
    for (auto const& row : problem.rows) {
      InternalRow ir{{}, row.relation, row.rhs};
      for (auto const& [j, a] : row.terms) {
        ir.rhs -= a * vars[j].offset;
        for (auto [k, s] : vars[j].columns) {
          ir.terms.emplace_back(k, s * a);
        }
      }
      rows.push_back(std::move(ir));
    }
    for (auto const& [k, cap] : bound_rows) {
      rows.push_back(InternalRow{{{k, Rational(1)}}, Relation::less_equal, cap});
    }
    // Nonnegative right-hand sides; homogeneous ">=" rows become "<=" so
    // they start with a slack in the basis.
    for (auto& row : rows) {
      bool flip = row.rhs < 0 || (row.rhs == 0 && row.relation == Relation::greater_equal);
      if (flip) {
        row.sigma = -1;
        row.rhs   = -row.rhs;
        for (auto& [k, v] : row.terms) {
          v = -v;
        }
        if (row.relation == Relation::less_equal) {
          row.relation = Relation::greater_equal;
        } else if (row.relation == Relation::greater_equal) {
          row.relation = Relation::less_equal;
        }
      }
    }

    std::size_t const mi = rows.size();
    std::size_t       n_slack = 0;
    std::size_t       n_art   = 0;
    for (auto const& row : rows) {
      n_slack += row.relation != Relation::equal;
      n_art += row.relation != Relation::less_equal;
    }
    std::size_t const first_art = nz + n_slack;
    std::size_t const ncols     = first_art + n_art;
    Tableau           t(mi, ncols);
    std::vector<std::size_t> unit(mi);
    {
      std::size_t slack = nz;
      std::size_t art   = first_art;
      for (std::size_t i = 0; i < mi; ++i) {
        for (auto const& [k, v] : rows[i].terms) {
          t.at(i, k) += v;
        }
        t.rhs(i) = rows[i].rhs;
        if (rows[i].relation == Relation::less_equal) {
          t.at(i, slack) = 1;
          unit[i]        = slack++;
        } else {
          if (rows[i].relation == Relation::greater_equal) {
            t.at(i, slack++) = -1;
          }
          t.at(i, art) = 1;
          unit[i]      = art++;
        }
        t.basis()[i] = unit[i];
      }
    }

    Outcome     out;
    std::size_t entering = 0;
    auto        pi_of    = [&](std::vector<Rational> const& c) {
      std::vector<Rational> pi(mi);
      for (std::size_t i = 0; i < mi; ++i) {
        for (std::size_t k = 0; k < mi; ++k) {
          Rational const& cb = c[t.basis()[k]];
          if (cb != 0 && t.at(k, unit[i]) != 0) {
            pi[i] += cb * t.at(k, unit[i]);
          }
        }
      }
      return pi;
    };
    auto primal_of = [&]() {
      std::vector<Rational> z(ncols);
      for (std::size_t i = 0; i < mi; ++i) {
        z[t.basis()[i]] = t.rhs(i);
      }
      std::vector<Rational> x(n);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = vars[j].offset;
        for (auto [k, s] : vars[j].columns) {
          x[j] += s * z[k];
        }
      }
      return x;
    };

    if (n_art > 0) {
      std::vector<Rational> c1(ncols);
      for (std::size_t k = first_art; k < ncols; ++k) {
        c1[k] = -1;
      }
      t.price(c1);
      simplex(t, ncols, out.pivots, entering);  // bounded above by 0
      Rational value = 0;
      for (std::size_t i = 0; i < mi; ++i) {
        value += c1[t.basis()[i]] * t.rhs(i);
      }
      if (value < 0) {
        auto                  w = pi_of(c1);
        std::vector<Rational> phi(m);
        for (std::size_t i = 0; i < m; ++i) {
          Rational mu = rows[i].sigma * w[i];
          phi[i]      = problem.rows[i].relation == Relation::less_equal ? mu : Rational(-mu);
        }
        out.status = Status::infeasible;
        out.farkas = primitive_integer_scaling(std::move(phi));
        return out;
      }
      // Drive zero-level artificials out of the basis where possible; rows
      // where that fails are redundant and stay inert.
      for (std::size_t i = 0; i < mi; ++i) {
        if (t.basis()[i] < first_art) {
          continue;
        }
        for (std::size_t j = 0; j < first_art; ++j) {
          if (t.at(i, j) != 0) {
            t.pivot(i, j);
            ++out.pivots;
            break;
          }
        }
      }
    }

    std::vector<Rational> c2(ncols);
    std::copy(cz.begin(), cz.end(), c2.begin());
    t.price(c2);
    if (simplex(t, first_art, out.pivots, entering) == Run::unbounded) {
      std::vector<Rational> dz(ncols);
      dz[entering] = 1;
      for (std::size_t i = 0; i < mi; ++i) {
        dz[t.basis()[i]] = -t.at(i, entering);
      }
      out.status = Status::unbounded;
      out.primal = primal_of();
      out.ray.assign(n, Rational(0));
      for (std::size_t j = 0; j < n; ++j) {
        for (auto [k, s] : vars[j].columns) {
          out.ray[j] += s * dz[k];
        }
      }
      return out;
    }

    out.status = Status::optimal;
    out.primal = primal_of();
    auto pi    = pi_of(c2);
    out.dual.assign(m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
      out.dual[i] = rows[i].sigma * pi[i];
      if (!maximize) {
        out.dual[i] = -out.dual[i];
      }
    }
    out.reduced_costs = problem.objective;
    for (std::size_t i = 0; i < m; ++i) {
      if (out.dual[i] == 0) {
        continue;
      }
      for (auto const& [j, a] : problem.rows[i].terms) {
        out.reduced_costs[j] -= out.dual[i] * a;
      }
    }
    out.objective_value = 0;
    for (std::size_t j = 0; j < n; ++j) {
      out.objective_value += problem.objective[j] * out.primal[j];
    }
    out.dual_value = 0;
    for (std::size_t i = 0; i < m; ++i) {
      out.dual_value += out.dual[i] * problem.rows[i].rhs;
    }
    for (std::size_t j = 0; j < n; ++j) {
      auto const& d = out.reduced_costs[j];
      if (d == 0) {
        continue;
      }
      // Max: positive d sits at the upper bound.  Min: at the lower bound.
      bool        upper_side = (d > 0) == maximize;
      auto const& b          = upper_side ? problem.upper[j] : problem.lower[j];
      if (!b) {
        throw Error("internal: reduced cost on an unbounded side of variable "
                    + std::to_string(j));
      }
      out.dual_value += d * *b;
    }
    return out;
  }

  // ------------------------------------------------------------- checking

  namespace {

    Rational row_value(Row const& row, std::vector<Rational> const& x) {
      Rational s = 0;
      for (auto const& [j, a] : row.terms) {
        s += a * x[j];
      }
      return s;
    }

    bool satisfies(Relation rel, Rational const& lhs, Rational const& rhs) {
      switch (rel) {
        case Relation::less_equal:
          return lhs <= rhs;
        case Relation::equal:
          return lhs == rhs;
        case Relation::greater_equal:
          return lhs >= rhs;
      }
      return false;
    }

    std::string check_feasible(Problem const& p, std::vector<Rational> const& x) {
      if (x.size() != p.variables) {
        return "primal has wrong length";
      }
      for (std::size_t i = 0; i < p.rows.size(); ++i) {
        if (!satisfies(p.rows[i].relation, row_value(p.rows[i], x), p.rows[i].rhs)) {
          return "row " + std::to_string(i) + " violated";
        }
      }
      for (std::size_t j = 0; j < p.variables; ++j) {
        if ((p.lower[j] && x[j] < *p.lower[j]) || (p.upper[j] && x[j] > *p.upper[j])) {
          return "bound of variable " + std::to_string(j) + " violated";
        }
      }
      return {};
    }

  }  // namespace

  std::string check_outcome(Problem const& p, Outcome const& o) {
    validate(p);
    std::size_t const n   = p.variables;
    std::size_t const m   = p.rows.size();
    bool const        max = p.sense == Sense::maximize;
    switch (o.status) {
      case Status::optimal: {
        if (auto e = check_feasible(p, o.primal); !e.empty()) {
          return e;
        }
        Rational cx = 0;
        for (std::size_t j = 0; j < n; ++j) {
          cx += p.objective[j] * o.primal[j];
        }
        if (cx != o.objective_value) {
          return "objective value does not match the primal";
        }
        if (o.dual.size() != m || o.reduced_costs.size() != n) {
          return "dual has wrong length";
        }
        std::vector<Rational> rebuilt = o.reduced_costs;
        for (std::size_t i = 0; i < m; ++i) {
          auto const& y   = o.dual[i];
          auto const  rel = p.rows[i].relation;
          // Max: "<=" rows need y >= 0.  Min: y <= 0.  Reverse for ">=".
          int need = rel == Relation::equal ? 0 : ((rel == Relation::less_equal) == max ? 1 : -1);
          if ((need > 0 && y < 0) || (need < 0 && y > 0)) {
            return "dual sign wrong on row " + std::to_string(i);
          }
          for (auto const& [j, a] : p.rows[i].terms) {
            rebuilt[j] += y * a;
          }
        }
        if (rebuilt != p.objective) {
          return "dual does not reproduce the objective";
        }
        Rational dv = 0;
        for (std::size_t i = 0; i < m; ++i) {
          dv += o.dual[i] * p.rows[i].rhs;
        }
        for (std::size_t j = 0; j < n; ++j) {
          auto const& d = o.reduced_costs[j];
          if (d == 0) {
            continue;
          }
          auto const& b = ((d > 0) == max) ? p.upper[j] : p.lower[j];
          if (!b) {
            return "reduced cost of variable " + std::to_string(j) + " has no bound";
          }
          dv += d * *b;
        }
        if (dv != o.dual_value || dv != cx) {
          return "strong duality fails";
        }
        return {};
      }
      case Status::infeasible: {
        if (o.farkas.size() != m) {
          return "farkas vector has wrong length";
        }
        std::vector<Rational> g(n);
        Rational              beta = 0;
        for (std::size_t i = 0; i < m; ++i) {
          auto const& phi = o.farkas[i];
          auto const  rel = p.rows[i].relation;
          if (rel != Relation::equal && phi < 0) {
            return "negative multiplier on inequality row " + std::to_string(i);
          }
          Rational sign = rel == Relation::less_equal ? -1 : 1;
          for (auto const& [j, a] : p.rows[i].terms) {
            g[j] += sign * phi * a;
          }
          beta += sign * phi * p.rows[i].rhs;
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (p.lower[j] && p.upper[j] && *p.lower[j] > *p.upper[j]) {
            return {};  // empty box
          }
        }
        Rational sup = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (g[j] == 0) {
            continue;
          }
          auto const& b = g[j] > 0 ? p.upper[j] : p.lower[j];
          if (!b) {
            return "combined inequality is unbounded in variable " + std::to_string(j);
          }
          sup += g[j] * *b;
        }
        if (!(sup < beta)) {
          return "farkas combination is not contradictory";
        }
        return {};
      }
      case Status::unbounded: {
        if (auto e = check_feasible(p, o.primal); !e.empty()) {
          return e;
        }
        if (o.ray.size() != n) {
          return "ray has wrong length";
        }
        for (std::size_t i = 0; i < m; ++i) {
          if (!satisfies(p.rows[i].relation, row_value(p.rows[i], o.ray), 0)) {
            return "ray leaves row " + std::to_string(i);
          }
        }
        Rational cr = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if ((p.lower[j] && o.ray[j] < 0) || (p.upper[j] && o.ray[j] > 0)) {
            return "ray leaves the bounds of variable " + std::to_string(j);
          }
          cr += p.objective[j] * o.ray[j];
        }
        if (max ? cr <= 0 : cr >= 0) {
          return "ray does not improve the objective";
        }
        return {};
      }
    }
    return "unknown status";
  }

  // ----------------------------------------------------------------- dumps

  namespace {

    void write_vector(std::ostream& os, char const* tag, std::vector<Rational> const& v) {
      os << tag;
      for (auto const& x : v) {
        os << ' ' << to_pq(x);
      }
      os << '\n';
    }

  }  // namespace

  std::string dump(Problem const& p) {
    std::ostringstream os;
    os << "lp " << p.variables << ' ' << p.rows.size() << '\n';
    os << "sense " << (p.sense == Sense::maximize ? "max" : "min") << '\n';
    write_vector(os, "objective", p.objective);
    for (std::size_t j = 0; j < p.variables; ++j) {
      if (p.lower[j] || p.upper[j]) {
        os << "bound " << j << ' ' << (p.lower[j] ? to_pq(*p.lower[j]) : "-") << ' '
           << (p.upper[j] ? to_pq(*p.upper[j]) : "-") << '\n';
      }
    }
    for (auto const& row : p.rows) {
      os << "row";
      for (auto const& [j, a] : row.terms) {
        os << ' ' << j << ':' << to_pq(a);
      }
      os << ' ' << to_string(row.relation) << ' ' << to_pq(row.rhs) << '\n';
    }
    return os.str();
  }

  std::string dump(Outcome const& o) {
    std::ostringstream os;
    os << "status " << to_string(o.status) << '\n';
    os << "pivots " << o.pivots << '\n';
    switch (o.status) {
      case Status::optimal:
        os << "objective " << to_pq(o.objective_value) << '\n';
        os << "dual_value " << to_pq(o.dual_value) << '\n';
        write_vector(os, "primal", o.primal);
        write_vector(os, "dual", o.dual);
        write_vector(os, "reduced", o.reduced_costs);
        break;
      case Status::infeasible:
        write_vector(os, "farkas", o.farkas);
        break;
      case Status::unbounded:
        write_vector(os, "primal", o.primal);
        write_vector(os, "ray", o.ray);
        break;
    }
    return os.str();
  }

}  // namespace conelab::lp
