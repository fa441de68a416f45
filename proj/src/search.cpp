#include "conelab/search.hpp"

#include <map>
#include <set>
#include <unordered_map>

#include "conelab/errors.hpp"
#include "conelab/lp.hpp"

namespace conelab {

  namespace {

    using lp::Relation;

    // f(s x) for every s in S and x in W, plus the columns where some value
    // is nonzero.  Columns that vanish for every s play no role in any LP
    // below.
    struct Table {
      std::vector<Element>               window;
      std::vector<std::vector<Rational>> values;  // [s][x]
      std::vector<std::size_t>           relevant;
    };

    Table tabulate(TestFunction const& f, QuerySpec const& q) {
      auto const& G = f.group();
      q.validate(G);
      Table t;
      t.window = q.window(G).elements();
      t.values.assign(q.test_set.size(), std::vector<Rational>(t.window.size()));
      for (std::size_t s = 0; s < q.test_set.size(); ++s) {
        for (std::size_t x = 0; x < t.window.size(); ++x) {
          t.values[s][x] = f(G.multiply(q.test_set[s], t.window[x]));
        }
      }
      for (std::size_t x = 0; x < t.window.size(); ++x) {
        for (auto const& row : t.values) {
          if (row[x] != 0) {
            t.relevant.push_back(x);
            break;
          }
        }
      }
      return t;
    }

    void require_normalizable(Table const& t) {
      for (auto x : t.relevant) {
        if (t.values[0][x] > 0) {
          return;
        }
      }
      throw PreconditionError("f vanishes on the window; sum u f = 1 is infeasible");
    }

    lp::Outcome solve_checked(lp::Problem const& p, std::vector<std::string>* trace) {
      auto o = lp::solve(p);
      if (trace) {
        trace->push_back(lp::dump(p) + lp::dump(o));
      }
      return o;
    }

  }  // namespace

  void QuerySpec::validate(Group const& G) const {
    if (test_set.empty() || test_set.front() != G.identity()) {
      throw PreconditionError("the test set must start with the identity");
    }
    std::set<std::string> keys;
    for (auto const& s : test_set) {
      if (!G.owns(s)) {
        throw PreconditionError("test set element does not belong to " + G.spec());
      }
      if (!keys.insert(s.key()).second) {
        throw PreconditionError("duplicate test set element " + G.format(s));
      }
    }
    for (auto const& g : window_generators) {
      if (!G.owns(g)) {
        throw PreconditionError("window generator does not belong to " + G.spec());
      }
    }
    if (epsilon <= 0) {
      throw PreconditionError("epsilon must be positive");
    }
  }

  BallTable QuerySpec::window(Group const& G) const {
    if (window_generators.empty()) {
      return ball(G, window_radius);
    }
    return ball(G, window_generators, window_radius);
  }

  AlternativeOutcome windowed_alternative(TestFunction const& f, QuerySpec const& q, bool trace) {
    auto const&        G = f.group();
    auto const         t = tabulate(f, q);
    auto const&        S = q.test_set;
    AlternativeOutcome out;
    auto*              log = trace ? &out.trace : nullptr;

    lp::Problem member;
    member.sense = lp::Sense::minimize;
    for (std::size_t k = 0; k < t.relevant.size(); ++k) {
      member.add_variable(0, Rational(0));
    }
    for (std::size_t s = 0; s < S.size(); ++s) {
      std::vector<std::pair<std::size_t, Rational>> terms;
      for (std::size_t k = 0; k < t.relevant.size(); ++k) {
        auto const& v = t.values[s][t.relevant[k]];
        if (v != 0) {
          terms.emplace_back(k, v);
        }
      }
      member.add_row(std::move(terms), Relation::equal, 1);
    }
    auto o = solve_checked(member, log);
    if (o.status == lp::Status::optimal) {
      Weight u(G);
      for (std::size_t k = 0; k < t.relevant.size(); ++k) {
        if (o.primal[k] != 0) {
          u.set(t.window[t.relevant[k]], o.primal[k]);
        }
      }
      out.witness = RatioWitness{f, S, Rational(0), std::move(u), true, 1, {"windowed_alternative"}};
      return out;
    }

    // tau_s free (columns 0..|S|-1) with |tau_s| <= w_s (the next |S|).
    lp::Problem sep;
    sep.sense         = lp::Sense::minimize;
    std::size_t const n = S.size();
    for (std::size_t s = 0; s < n; ++s) {
      sep.add_variable(0);
    }
    for (std::size_t s = 0; s < n; ++s) {
      sep.add_variable(1, Rational(0));
      sep.add_row({{n + s, 1}, {s, -1}}, Relation::greater_equal, 0);
      sep.add_row({{n + s, 1}, {s, 1}}, Relation::greater_equal, 0);
    }
    for (auto x : t.relevant) {
      std::vector<std::pair<std::size_t, Rational>> terms;
      for (std::size_t s = 0; s < n; ++s) {
        if (t.values[s][x] != 0) {
          terms.emplace_back(s, t.values[s][x]);
        }
      }
      sep.add_row(std::move(terms), Relation::less_equal, 0);
    }
    std::vector<std::pair<std::size_t, Rational>> total;
    for (std::size_t s = 0; s < n; ++s) {
      total.emplace_back(s, 1);
    }
    sep.add_row(std::move(total), Relation::equal, 1);
    auto so = solve_checked(sep, log);
    if (so.status != lp::Status::optimal) {
      throw Error("separating LP did not reach an optimum after an infeasible membership LP");
    }
    TranslateViolation v{f, {}, q.window_radius, VerificationLevel::window, {"windowed_alternative"}};
    for (std::size_t s = 0; s < n; ++s) {
      if (so.primal[s] != 0) {
        v.items.emplace_back(-so.primal[s], G.inverse(S[s]));
      }
    }
    out.violation = canonicalize(std::move(v));
    return out;
  }

  RatioDefect ratio_defect_lp(TestFunction const& f, QuerySpec const& q, bool one_sided) {
    auto const& G = f.group();
    auto const  t = tabulate(f, q);
    require_normalizable(t);
    std::size_t const m = t.relevant.size();

    lp::Problem p;
    p.sense = lp::Sense::minimize;
    for (std::size_t k = 0; k < m; ++k) {
      p.add_variable(0, Rational(0));
    }
    std::size_t const lambda = p.add_variable(1, Rational(0));

    auto row_of = [&](std::size_t s) {
      std::vector<std::pair<std::size_t, Rational>> terms;
      for (std::size_t k = 0; k < m; ++k) {
        auto const& v = t.values[s][t.relevant[k]];
        if (v != 0) {
          terms.emplace_back(k, v);
        }
      }
      return terms;
    };
    p.add_row(row_of(0), Relation::equal, 1);
    for (std::size_t s = 1; s < q.test_set.size(); ++s) {
      auto upper = row_of(s);
      auto lower = upper;
      upper.emplace_back(lambda, -1);
      p.add_row(std::move(upper), Relation::less_equal, 1);
      if (!one_sided) {
        lower.emplace_back(lambda, 1);
        p.add_row(std::move(lower), Relation::greater_equal, 1);
      }
    }
    auto o = lp::solve(p);
    if (o.status != lp::Status::optimal) {
      throw Error(std::string("ratio defect LP ended ") + lp::to_string(o.status));
    }
    RatioDefect out{o.objective_value, Weight(G), o.dual};
    for (std::size_t k = 0; k < m; ++k) {
      if (o.primal[k] != 0) {
        out.u.set(t.window[t.relevant[k]], o.primal[k]);
      }
    }
    return out;
  }

  ReiterDefect reiter_defect_lp(TestFunction const& f, QuerySpec const& q) {
    auto const& G = f.group();
    auto const  t = tabulate(f, q);
    require_normalizable(t);
    std::size_t const m = t.relevant.size();

    lp::Problem p;
    p.sense = lp::Sense::minimize;
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t k = 0; k < m; ++k) {
      p.add_variable(0, Rational(0));
      column.emplace(t.window[t.relevant[k]].key(), k);
    }
    std::size_t const lambda = p.add_variable(1, Rational(0));

    std::vector<std::pair<std::size_t, Rational>> norm;
    for (std::size_t k = 0; k < m; ++k) {
      auto const& v = t.values[0][t.relevant[k]];
      if (v != 0) {
        norm.emplace_back(k, v);
      }
    }
    p.add_row(std::move(norm), Relation::equal, 1);

    for (std::size_t s = 1; s < q.test_set.size(); ++s) {
      auto const& g = q.test_set[s];
      auto const  g_inv = G.inverse(g);
      // Points y of W u sW with f(y) > 0.
      std::map<Element, Rational> points;
      for (auto x : t.relevant) {
        if (t.values[0][x] > 0) {
          points.emplace(t.window[x], t.values[0][x]);
        }
        if (t.values[s][x] > 0) {
          points.emplace(G.multiply(g, t.window[x]), t.values[s][x]);
        }
      }
      std::vector<std::pair<std::size_t, Rational>> defect{{lambda, -1}};
      for (auto const& [y, fy] : points) {
        auto from = column.find(G.multiply(g_inv, y).key());
        auto at   = column.find(y.key());
        if (from == column.end() && at == column.end()) {
          continue;
        }
        std::size_t z = p.add_variable(0, Rational(0));
        // z >= +-(u(s^-1 y) - u(y)).
        for (int sign : {1, -1}) {
          std::vector<std::pair<std::size_t, Rational>> terms{{z, 1}};
          if (from != column.end()) {
            terms.emplace_back(from->second, -sign);
          }
          if (at != column.end()) {
            terms.emplace_back(at->second, sign);
          }
          p.add_row(std::move(terms), Relation::greater_equal, 0);
        }
        defect.emplace_back(z, fy);
      }
      p.add_row(std::move(defect), Relation::less_equal, 0);
    }
    auto o = lp::solve(p);
    if (o.status != lp::Status::optimal) {
      throw Error(std::string("Reiter defect LP ended ") + lp::to_string(o.status));
    }
    ReiterDefect out{o.objective_value, Weight(G)};
    for (std::size_t k = 0; k < m; ++k) {
      if (o.primal[k] != 0) {
        out.u.set(t.window[t.relevant[k]], o.primal[k]);
      }
    }
    return out;
  }

  MooreGap moore_gap(TestFunction const& E, std::vector<Element> const& T, BallTable const& window) {
    auto const& G = E.group();
    auto        indicator = [&](Element const& x) {
      auto v = E(x);
      if (v != 0 && v != 1) {
        throw PreconditionError("moore_gap needs a 0/1 function; got " + to_pq(v) + " at " +
                                G.format(x));
      }
      return v;
    };
    std::vector<Element> inverses;
    for (auto const& g : T) {
      if (!G.owns(g)) {
        throw GroupMismatch("translate does not belong to " + G.spec());
      }
      inverses.push_back(G.inverse(g));
    }

    lp::Problem p;
    p.sense = lp::Sense::minimize;
    for (std::size_t j = 0; j < T.size(); ++j) {
      p.add_variable(0);
    }
    std::size_t const lambda = p.add_variable(1, Rational(0));
    for (auto const& x : window.elements()) {
      Rational ex = indicator(x);
      std::vector<std::pair<std::size_t, Rational>> terms;
      for (std::size_t j = 0; j < T.size(); ++j) {
        Rational d = ex - indicator(G.multiply(inverses[j], x));
        if (d != 0) {
          terms.emplace_back(j, d);
        }
      }
      // -lambda <= 1 - sum t d <= lambda.
      auto lower = terms;
      terms.emplace_back(lambda, -1);
      p.add_row(std::move(terms), Relation::less_equal, 1);
      lower.emplace_back(lambda, 1);
      p.add_row(std::move(lower), Relation::greater_equal, 1);
    }
    auto o = lp::solve(p);
    if (o.status != lp::Status::optimal) {
      throw Error(std::string("Moore LP ended ") + lp::to_string(o.status));
    }
    MooreGap out{o.objective_value, {}};
    out.t.assign(o.primal.begin(), o.primal.begin() + static_cast<std::ptrdiff_t>(T.size()));
    return out;
  }

  std::vector<FreenessWitness> find_free_pairs(Group const&                G,
                                               std::vector<Element> const& S,
                                               std::size_t                 N,
                                               std::size_t                 limit,
                                               std::size_t                 cap) {
    if (N < 2) {
      throw PreconditionError("free pair search needs depth >= 2");
    }
    auto const candidates = (S.empty() ? ball(G, 2, cap) : ball(G, S, 2, cap)).elements();
    std::vector<FreenessWitness> out;
    for (std::size_t i = 0; i < candidates.size() && out.size() < limit; ++i) {
      if (candidates[i] == G.identity()) {
        continue;
      }
      for (std::size_t j = i + 1; j < candidates.size() && out.size() < limit; ++j) {
        if (candidates[j] == G.identity()) {
          continue;
        }
        auto w = free_to_depth(G, candidates[i], candidates[j], N, cap);
        if (w.free) {
          out.push_back(std::move(w));
        }
      }
    }
    return out;
  }

}  // namespace conelab
