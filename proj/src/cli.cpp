#include "conelab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "conelab/ball.hpp"
#include "conelab/certificates.hpp"
#include "conelab/constructions.hpp"
#include "conelab/errors.hpp"
#include "conelab/functions.hpp"
#include "conelab/group.hpp"
#include "conelab/search.hpp"

namespace conelab::cli {

  namespace {

    struct Options {
      std::string config;
      std::string out_path;
      bool        json = false;

      std::string group;
      std::string function;
      std::string set;
      std::string gens;
      std::string epsilon;
      std::string base;
      std::string a, b;
      std::string translates;
      std::string cert;
      std::string embedding;
      std::string target;
      std::string trace_path;
      std::size_t radius    = 0;
      std::size_t window    = 0;
      std::size_t depth     = 0;
      std::size_t limit     = 10;
      int         translate_radius = -1;
      std::optional<std::size_t> window_override;
      bool        one_sided  = false;
      bool        structural = false;
      bool        search     = false;
    };

    // Named groups and predicates from --config.
    struct Context {
      std::map<std::string, std::string> groups;
      PredicateRegistry                  registry;

      Group group(std::string const& spec) const {
        auto it = groups.find(spec);
        return make_group(it == groups.end() ? spec : it->second);
      }
    };

    Context load_context(std::string const& path) {
      Context ctx;
      if (path.empty()) {
        return ctx;
      }
      std::ifstream in(path);
      if (!in) {
        throw Error("cannot read config file " + path);
      }
      auto j = Json::parse(in);
      if (j.contains("groups")) {
        for (auto const& [name, spec] : j.at("groups").items()) {
          ctx.groups[name] = spec.get<std::string>();
        }
      }
      if (j.contains("predicates")) {
        for (auto const& [name, p] : j.at("predicates").items()) {
          Group G = ctx.group(p.at("group").get<std::string>());
          std::vector<Element> support;
          for (auto const& e : p.at("support")) {
            support.push_back(G.parse_element(e.get<std::string>()));
          }
          Rational value = p.contains("value") ? parse_rational(p.at("value").get<std::string>()) : Rational(1);
          ctx.registry.add_finite_support(name, G, support, value);
        }
      }
      return ctx;
    }

    Json load_json(std::string const& path) {
      std::ifstream in(path);
      if (!in) {
        throw Error("cannot read certificate file " + path);
      }
      return Json::parse(in);
    }

    void write_file(std::string const& path, std::string const& text) {
      std::ofstream f(path, std::ios::binary);
      if (!f) {
        throw Error("cannot write " + path);
      }
      f << text;
    }

    std::vector<Element> elements_or(Group const& G, std::string const& list,
                                     std::vector<Element> const& fallback) {
      return list.empty() ? fallback : G.parse_elements(list);
    }

    void print_report(std::ostream& out, VerificationReport const& r) {
      out << "verification " << (r.passed ? "passed" : "failed") << " at level " << to_string(r.level)
          << "\n";
      for (auto const& [name, v] : r.quantities) {
        out << "  " << name << " = " << to_pq(v) << "\n";
      }
      for (auto const& f : r.failures) {
        out << "  failure: " << f << "\n";
      }
    }

    // Emits the certificate: JSON to --out and/or stdout, else a summary.
    void emit(Options const& o, std::ostream& out, Certificate const& c, VerificationReport const& r) {
      std::string text;
      if (o.json || !o.out_path.empty()) {
        text = serialize(c, r);
      }
      if (!o.out_path.empty()) {
        write_file(o.out_path, text);
      }
      if (o.json) {
        out << text;
      } else {
        out << "certificate " << certificate_kind(c) << " on " << certificate_group(c).spec() << "\n";
        print_report(out, r);
      }
    }

    int verdict(Certificate const& c, VerificationReport const& r) {
      if (!r.passed) {
        return failure;
      }
      if (std::holds_alternative<TranslateViolation>(c)) {
        return obstruction;
      }
      if (auto const* f = std::get_if<FreenessWitness>(&c)) {
        return f->free ? obstruction : ok;
      }
      return ok;
    }

    QuerySpec query(Group const& G, Options const& o) {
      QuerySpec q;
      q.test_set      = G.parse_elements(o.set);
      q.window_radius = o.window;
      if (!o.gens.empty()) {
        q.window_generators = G.parse_elements(o.gens);
      }
      if (!o.epsilon.empty()) {
        q.epsilon = parse_rational(o.epsilon);
      }
      return q;
    }

    // ------------------------------------------------------------ commands

    int cmd_groups(Options const& o, std::ostream& out) {
      struct Row {
        char const* spec;
        char const* about;
      };
      static constexpr Row rows[] = {
          {"Z^d", "free abelian group of rank d; elements x, y, z, ... for the axes"},
          {"F<k>", "free group of rank k; letters a, b, c, ..."},
          {"H3", "discrete Heisenberg group; generators x, y"},
          {"LL", "lamplighter Z/2 wr Z; t moves the cursor, a toggles the lamp"},
          {"BS1_<m>", "Baumslag-Solitar BS(1,m) as affine maps; a: x -> m x, b: x -> x + 1"},
          {"Dinf", "infinite dihedral group; t translation, r reflection"},
          {"prod(A,B)", "direct product of two groups from this list"},
          {"mat:[[..]],[[..]]", "group generated by invertible rational matrices g1, g2, ..."},
      };
      if (o.json) {
        Json j = Json::array();
        for (auto const& r : rows) {
          j.push_back({{"spec", r.spec}, {"description", r.about}});
        }
        out << j.dump(2) << "\n";
        return ok;
      }
      for (auto const& r : rows) {
        out << r.spec << std::string(20 - std::string(r.spec).size(), ' ') << r.about << "\n";
      }
      return ok;
    }

    int cmd_growth(Context const& ctx, Options const& o, std::ostream& out) {
      Group G    = ctx.group(o.group);
      auto  gens = elements_or(G, o.gens, G.generators());
      auto  rep  = growth_report(G, gens, o.radius);
      if (o.json) {
        Json j;
        j["group"] = G.spec();
        j["sizes"] = rep.sizes;
        Json ratios = Json::array();
        for (auto const& r : rep.ratios) {
          ratios.push_back(to_pq(r));
        }
        j["ratios"]    = ratios;
        j["trend"]     = to_string(rep.trend);
        j["truncated"] = rep.truncated;
        out << j.dump(2) << "\n";
        return ok;
      }
      out << "n\t|B_n|\tratio\n";
      for (std::size_t n = 0; n < rep.sizes.size(); ++n) {
        out << n << "\t" << rep.sizes[n] << "\t" << (n == 0 ? std::string("-") : to_pq(rep.ratios[n - 1]))
            << "\n";
      }
      if (rep.truncated) {
        out << "truncated at the ball cap\n";
      }
      out << "trend " << to_string(rep.trend) << "\n";
      out << "|B_" << rep.sizes.size() - 1 << "| = " << rep.sizes.back() << "\n";
      return ok;
    }

    int cmd_ball(Context const& ctx, Options const& o, std::ostream& out) {
      Group G    = ctx.group(o.group);
      auto  gens = elements_or(G, o.gens, G.generators());
      auto  B    = ball(G, gens, o.radius);
      if (o.json) {
        Json j;
        j["group"]  = G.spec();
        j["radius"] = o.radius;
        Json layers = Json::array();
        for (auto const& layer : B.layers) {
          Json l = Json::array();
          for (auto const& g : layer) {
            l.push_back(G.format(g));
          }
          layers.push_back(l);
        }
        j["layers"] = layers;
        out << j.dump(2) << "\n";
        return ok;
      }
      for (std::size_t k = 0; k < B.layers.size(); ++k) {
        for (auto const& g : B.layers[k]) {
          out << k << "\t" << G.format(g) << "\n";
        }
      }
      out << "|B_" << o.radius << "| = " << B.size() << "\n";
      return ok;
    }

    int cmd_alternative(Context const& ctx, Options const& o, std::ostream& out) {
      Group G   = ctx.group(o.group);
      auto  f   = parse_test_function(G, o.function, ctx.registry);
      auto  res = windowed_alternative(f, query(G, o), !o.trace_path.empty());
      if (!o.trace_path.empty()) {
        std::string text;
        for (auto const& t : res.trace) {
          text += t;
        }
        write_file(o.trace_path, text);
      }
      if (res.witness) {
        auto r = verify_certificate(*res.witness);
        emit(o, out, *res.witness, r);
        return verdict(*res.witness, r);
      }
      auto& v = *res.violation;
      VerificationReport r;
      try {
        r       = structural_verify_semigroup_violation(v);
        v.level = VerificationLevel::structural;
      } catch (PreconditionError const& e) {
        if (o.structural) {
          throw;
        }
        r = verify_certificate(v);
      }
      emit(o, out, v, r);
      return verdict(v, r);
    }

    int cmd_ratio(Context const& ctx, Options const& o, std::ostream& out) {
      Group G = ctx.group(o.group);
      auto  f = parse_test_function(G, o.function, ctx.registry);
      auto  q = query(G, o);
      auto  d = ratio_defect_lp(f, q, o.one_sided);
      Rational eps = o.epsilon.empty() ? d.lambda : q.epsilon;
      RatioWitness w{f, q.test_set, eps, d.u, !o.one_sided, 1, {"ratio_defect_lp"}};
      auto         r = verify_certificate(w);
      if (!o.json) {
        out << "optimal defect " << to_pq(d.lambda) << "\n";
      }
      emit(o, out, w, r);
      return r.passed ? ok : inconclusive;
    }

    int cmd_reiter(Context const& ctx, Options const& o, std::ostream& out) {
      Group G = ctx.group(o.group);
      auto  f = parse_test_function(G, o.function, ctx.registry);
      auto  q = query(G, o);
      auto  d = reiter_defect_lp(f, q);
      ReiterWitness w{f, q.test_set, q.epsilon, d.u, 1, {"reiter_defect_lp"}};
      auto          r = verify_certificate(w);
      if (!o.json) {
        out << "optimal defect " << to_pq(d.epsilon) << "\n";
      }
      emit(o, out, w, r);
      return r.passed ? ok : inconclusive;
    }

    int cmd_jenkins(Context const& ctx, Options const& o, std::ostream& out) {
      Group       G = ctx.group(o.group);
      JenkinsSpec spec{G, elements_or(G, o.gens, G.generators()), parse_rational(o.epsilon), o.radius,
                       std::nullopt};
      if (!o.base.empty()) {
        spec.base = parse_rational(o.base);
      }
      auto J = jenkins_weight(spec);
      ReiterWitness w{constant_function(G, 1), symmetrize(G, spec.S), spec.epsilon, J.rho, 1,
                      {"jenkins_weight"}};
      if (!o.json) {
        out << "base " << to_pq(J.base) << "\n";
        out << "pointwise check " << (J.pointwise.passed ? "passed" : "failed") << "\n";
        for (auto const& [name, v] : J.pointwise.quantities) {
          out << "  " << name << " = " << to_pq(v) << "\n";
        }
      }
      emit(o, out, w, J.reiter);
      return J.pointwise.passed && J.reiter.passed ? ok : inconclusive;
    }

    int cmd_moore(Context const& ctx, Options const& o, std::ostream& out) {
      Group G = ctx.group(o.group);
      auto  E = parse_test_function(G, o.function, ctx.registry);
      std::vector<Element> T;
      if (o.translate_radius >= 0) {
        T = ball(G, static_cast<std::size_t>(o.translate_radius)).elements();
      } else {
        T = G.parse_elements(o.translates);
      }
      auto W   = ball(G, elements_or(G, o.gens, G.generators()), o.window);
      auto gap = moore_gap(E, T, W);
      if (o.json) {
        Json j;
        j["group"]  = G.spec();
        j["f"]      = E.spec();
        j["window_radius"] = o.window;
        j["value"]  = to_pq(gap.value);
        Json t      = Json::array();
        for (std::size_t i = 0; i < T.size(); ++i) {
          t.push_back({{"g", G.format(T[i])}, {"t", to_pq(gap.t[i])}});
        }
        j["t"] = t;
        auto text = j.dump(2) + "\n";
        if (!o.out_path.empty()) {
          write_file(o.out_path, text);
        }
        out << text;
      } else {
        out << "window value " << to_pq(gap.value) << "\n";
        for (std::size_t i = 0; i < T.size(); ++i) {
          if (gap.t[i] != 0) {
            out << "  t[" << G.format(T[i]) << "] = " << to_pq(gap.t[i]) << "\n";
          }
        }
      }
      // Value 1 on the window already forces distance one for this T.
      return gap.value == 1 ? ok : inconclusive;
    }

    int cmd_freeness(Context const& ctx, Options const& o, std::ostream& out) {
      Group G = ctx.group(o.group);
      if (o.search) {
        auto pairs = find_free_pairs(G, elements_or(G, o.gens, {}), o.depth, o.limit);
        if (o.json) {
          Json j = Json::array();
          for (auto const& w : pairs) {
            j.push_back(to_json(w, verify_certificate(w)));
          }
          out << j.dump(2) << "\n";
        } else {
          for (auto const& w : pairs) {
            out << G.format(w.a) << "\t" << G.format(w.b) << "\tfree to depth " << w.depth << "\n";
          }
          out << pairs.size() << " free pair(s)\n";
        }
        return pairs.empty() ? inconclusive : obstruction;
      }
      auto w = free_to_depth(G, G.parse_element(o.a), G.parse_element(o.b), o.depth);
      auto r = verify_certificate(w);
      if (!o.json && w.collision) {
        out << "collision " << w.collision->first << " = " << w.collision->second << "\n";
      }
      emit(o, out, w, r);
      return verdict(w, r);
    }

    int cmd_violation_verify(Context const& ctx, Options const& o, std::ostream& out) {
      auto loaded = certificate_from_json(load_json(o.cert), ctx.registry);
      auto const* v = std::get_if<TranslateViolation>(&loaded.certificate);
      if (!v) {
        throw PreconditionError("certificate is not a violation");
      }
      VerificationReport r;
      if (o.structural) {
        auto copy = *v;
        if (o.window_override) {
          copy.window_radius = *o.window_override;
        }
        r = structural_verify_semigroup_violation(copy);
      } else {
        r = verify_certificate(*v, o.window_override);
      }
      print_report(out, r);
      return r.passed ? obstruction : failure;
    }

    int cmd_transport(Context const& ctx, Options const& o, std::ostream& out) {
      auto loaded = certificate_from_json(load_json(o.cert), ctx.registry);
      Group G     = ctx.group(o.target);
      auto  c     = transport_subgroup(loaded.certificate, Embedding::parse(G, o.embedding));
      VerificationReport r;
      auto* v = std::get_if<TranslateViolation>(&c);
      if (v && v->level == VerificationLevel::structural) {
        try {
          r = structural_verify_semigroup_violation(*v);
        } catch (PreconditionError const&) {
          v->level = VerificationLevel::window;
          r        = verify_certificate(c);
        }
      } else {
        r = verify_certificate(c);
      }
      emit(o, out, c, r);
      return verdict(c, r);
    }

    int cmd_verify(Context const& ctx, Options const& o, std::ostream& out) {
      auto j      = load_json(o.cert);
      auto loaded = certificate_from_json(j, ctx.registry);
      auto r      = verify_json(j, ctx.registry);
      out << "certificate " << certificate_kind(loaded.certificate) << " on "
          << certificate_group(loaded.certificate).spec() << "\n";
      print_report(out, r);
      return verdict(loaded.certificate, r);
    }

  }  // namespace

  int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact certificates for translate properties of group functions", "conelab"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "JSON file with named groups and predicates");

    auto out_opt  = [&](CLI::App* c) { c->add_option("--out", o.out_path, "write the JSON output here"); };
    auto json_opt = [&](CLI::App* c) { c->add_flag("--json", o.json, "print JSON instead of text"); };
    auto group_opt = [&](CLI::App* c) { c->add_option("--group", o.group, "group spec or config name")->required(); };
    auto query_opts = [&](CLI::App* c) {
      group_opt(c);
      c->add_option("--f", o.function, "test function spec")->required();
      c->add_option("--set", o.set, "test set, identity first, comma separated")->required();
      c->add_option("--window", o.window, "window radius")->required();
      c->add_option("--gens", o.gens, "window generators (default: the group's)");
      c->add_option("--epsilon", o.epsilon, "epsilon as p/q");
      out_opt(c);
      json_opt(c);
    };

    auto* groups = app.add_subcommand("groups", "list the group catalog");
    json_opt(groups);

    auto* growth = app.add_subcommand("growth", "ball sizes and growth trend");
    group_opt(growth);
    growth->add_option("--radius", o.radius, "largest radius")->required();
    growth->add_option("--gens", o.gens, "generating set (default: the group's)");
    json_opt(growth);

    auto* ballc = app.add_subcommand("ball", "list a ball layer by layer");
    group_opt(ballc);
    ballc->add_option("--radius", o.radius, "radius")->required();
    ballc->add_option("--gens", o.gens, "generating set (default: the group's)");
    json_opt(ballc);

    auto* alt = app.add_subcommand("alternative", "windowed Farkas alternative");
    query_opts(alt);
    alt->add_flag("--structural", o.structural, "fail unless the violation upgrades structurally");
    alt->add_option("--trace", o.trace_path, "write the LP dumps here");

    auto* ratio = app.add_subcommand("ratio", "minimal ratio defect on the window");
    query_opts(ratio);
    ratio->add_flag("--one-sided", o.one_sided, "only bound translates from above");

    auto* reiter = app.add_subcommand("reiter", "minimal Reiter defect on the window");
    query_opts(reiter);

    auto* jenkins = app.add_subcommand("jenkins", "exponentially decaying weight r^|g|");
    group_opt(jenkins);
    jenkins->add_option("--gens", o.gens, "generating set (default: the group's)");
    jenkins->add_option("--epsilon", o.epsilon, "epsilon as p/q")->required();
    jenkins->add_option("--radius", o.radius, "truncation radius")->required();
    jenkins->add_option("--base", o.base, "base r overriding 1/(1+epsilon)");
    out_opt(jenkins);
    json_opt(jenkins);

    auto* moore = app.add_subcommand("moore-gap", "windowed distance from 1 to span{E - gE}");
    group_opt(moore);
    moore->add_option("--f", o.function, "0/1 test function spec")->required();
    auto* tr  = moore->add_option("--translates", o.translates, "translates g, comma separated");
    auto* trr = moore->add_option("--translate-radius", o.translate_radius, "use every g of this ball");
    tr->excludes(trr);
    moore->add_option("--window", o.window, "window radius")->required();
    moore->add_option("--gens", o.gens, "window generators (default: the group's)");
    out_opt(moore);
    json_opt(moore);

    auto* freeness = app.add_subcommand("freeness", "free sub-semigroup test or search");
    group_opt(freeness);
    freeness->add_option("--a", o.a, "first element");
    freeness->add_option("--b", o.b, "second element");
    freeness->add_option("--depth", o.depth, "word length")->required();
    freeness->add_flag("--search", o.search, "scan pairs from the radius-two ball");
    freeness->add_option("--limit", o.limit, "maximum number of pairs to report");
    freeness->add_option("--gens", o.gens, "generating set for the search ball");
    out_opt(freeness);
    json_opt(freeness);

    auto* vv = app.add_subcommand("violation-verify", "check a violation certificate");
    vv->add_option("--cert", o.cert, "certificate file")->required();
    vv->add_flag("--structural", o.structural, "upgrade to the structural level");
    vv->add_option("--window", o.window_override, "override the stored window radius");

    auto* transport = app.add_subcommand("transport", "move a certificate into a larger group");
    transport->add_option("--cert", o.cert, "certificate file")->required();
    transport->add_option("--embedding", o.embedding, "embedding spec (id, factor:1, coords:k, ...)")->required();
    transport->add_option("--target", o.target, "target group")->required();
    out_opt(transport);
    json_opt(transport);

    auto* verify = app.add_subcommand("verify", "re-verify a certificate file");
    verify->add_option("--cert", o.cert, "certificate file")->required();

    std::vector<char const*> argv;
    for (auto const& a : args) {
      argv.push_back(a.c_str());
    }
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::CallForHelp const& e) {
      return app.exit(e, out, err);
    } catch (CLI::CallForAllHelp const& e) {
      return app.exit(e, out, err);
    } catch (CLI::ParseError const& e) {
      app.exit(e, out, err);
      return failure;
    }

    try {
      auto ctx = load_context(o.config);
      if (groups->parsed()) return cmd_groups(o, out);
      if (growth->parsed()) return cmd_growth(ctx, o, out);
      if (ballc->parsed()) return cmd_ball(ctx, o, out);
      if (alt->parsed()) return cmd_alternative(ctx, o, out);
      if (ratio->parsed()) return cmd_ratio(ctx, o, out);
      if (reiter->parsed()) return cmd_reiter(ctx, o, out);
      if (jenkins->parsed()) return cmd_jenkins(ctx, o, out);
      if (moore->parsed()) return cmd_moore(ctx, o, out);
      if (freeness->parsed()) {
        if (!o.search && (o.a.empty() || o.b.empty())) {
          throw PreconditionError("freeness needs --a and --b, or --search");
        }
        return cmd_freeness(ctx, o, out);
      }
      if (vv->parsed()) return cmd_violation_verify(ctx, o, out);
      if (transport->parsed()) return cmd_transport(ctx, o, out);
      if (verify->parsed()) return cmd_verify(ctx, o, out);
    } catch (ParseError const& e) {
      err << "parse error " << e.what() << "\n";
      return failure;
    } catch (Json::exception const& e) {
      err << "error: malformed JSON: " << e.what() << "\n";
      return failure;
    } catch (std::exception const& e) {
      err << "error: " << e.what() << "\n";
      return failure;
    }
    return failure;
  }

}  // namespace conelab::cli
