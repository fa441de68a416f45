#include "conelab/certificates.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "conelab/errors.hpp"

namespace conelab {

  char const* to_string(VerificationLevel level) {
    switch (level) {
      case VerificationLevel::window:
        return "window";
      case VerificationLevel::structural:
        return "structural";
      case VerificationLevel::global:
        return "global";
    }
    return "?";
  }

  Rational const* VerificationReport::quantity(std::string const& name) const {
    for (auto const& [k, v] : quantities) {
      if (k == name) {
        return &v;
      }
    }
    return nullptr;
  }

  Group const& certificate_group(Certificate const& c) {
    return std::visit(
        [](auto const& x) -> Group const& {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, FreenessWitness>) {
            return x.group;
          } else {
            return x.f.group();
          }
        },
        c);
  }

  char const* certificate_kind(Certificate const& c) {
    switch (c.index()) {
      case 0:
        return "ratio_witness";
      case 1:
        return "reiter_witness";
      case 2:
        return "translate_violation";
      default:
        return "freeness_witness";
    }
  }

  namespace {

    void require_in(Group const& G, Element const& x) {
      if (!G.owns(x)) {
        throw GroupMismatch("element " + x.key() + " is not in " + G.spec());
      }
    }

    Rational pth(Rational const& x, unsigned p) {
      return p == 1 ? x : power(x, p);
    }

    void check_witness_inputs(TestFunction const& f, Weight const& u,
                              std::vector<Element> const& S, unsigned p,
                              VerificationReport& r) {
      if (!(u.group() == f.group())) {
        throw GroupMismatch("witness weight lives on " + u.group().spec() + ", f on "
                            + f.group().spec());
      }
      for (auto const& s : S) {
        require_in(f.group(), s);
      }
      if (p == 0) {
        throw PreconditionError("p must be at least 1");
      }
      if (!u.is_nonnegative()) {
        r.failures.push_back("u has a negative entry");
      }
    }

    Rational weight_mass(Weight const& u) {
      Rational m = 0;
      for (auto const& [x, v] : u.entries()) {
        m += v;
      }
      return m;
    }

    VerificationReport verify_ratio(RatioWitness const& w) {
      VerificationReport r;
      r.level = VerificationLevel::global;
      auto const& G = w.f.group();
      check_witness_inputs(w.f, w.u, w.test_set, w.p, r);
      Rational norm = 0;
      for (auto const& [x, v] : w.u.entries()) {
        norm += pth(v * w.f(x), w.p);
      }
      r.quantities.emplace_back("norm", norm);
      r.quantities.emplace_back("mass", weight_mass(w.u));
      r.quantities.emplace_back("epsilon", w.epsilon);
      if (norm != 1) {
        r.failures.push_back("u is not normalised: sum u f = " + to_pq(norm));
      }
      Rational hi = pth(1 + w.epsilon, w.p);
      Rational lo = w.epsilon >= 1 ? Rational(0) : pth(1 - w.epsilon, w.p);
      Rational defect = 0;
      for (auto const& s : w.test_set) {
        Rational sum = 0;
        for (auto const& [x, v] : w.u.entries()) {
          sum += pth(v * w.f(G.multiply(s, x)), w.p);
        }
        auto name = G.format(s);
        r.quantities.emplace_back("sum[" + name + "]", sum);
        defect = std::max(defect, abs_value(sum - norm));
        bool ok = w.two_sided ? (lo * norm <= sum && sum <= hi * norm) : sum < hi * norm;
        if (!ok) {
          r.failures.push_back("translate by " + name + " gives " + to_pq(sum));
        }
      }
      r.quantities.emplace_back("defect", defect);
      r.passed = r.failures.empty();
      return r;
    }

    VerificationReport verify_reiter(ReiterWitness const& w) {
      VerificationReport r;
      r.level = VerificationLevel::global;
      auto const& G = w.f.group();
      check_witness_inputs(w.f, w.u, w.test_set, w.p, r);
      Rational norm = 0;
      for (auto const& [x, v] : w.u.entries()) {
        norm += pth(v * w.f(x), w.p);
      }
      r.quantities.emplace_back("norm", norm);
      r.quantities.emplace_back("mass", weight_mass(w.u));
      r.quantities.emplace_back("epsilon", w.epsilon);
      if (norm <= 0) {
        r.failures.push_back("u f vanishes");
      }
      Rational bound = pth(w.epsilon, w.p) * norm;
      Rational worst = 0;
      for (auto const& s : w.test_set) {
        // x ranges over supp(u) and s supp(u); elsewhere both terms vanish.
        std::map<Element, Rational> diff;
        for (auto const& [y, v] : w.u.entries()) {
          diff[G.multiply(s, y)] += v;
          diff[y] -= v;
        }
        Rational defect = 0;
        for (auto const& [x, d] : diff) {
          if (d != 0) {
            defect += pth(abs_value(d) * w.f(x), w.p);
          }
        }
        auto name = G.format(s);
        r.quantities.emplace_back("defect[" + name + "]", defect);
        worst = std::max(worst, defect);
        if (!(defect < bound)) {
          r.failures.push_back("translate by " + name + " has defect " + to_pq(defect));
        }
      }
      r.quantities.emplace_back("relative_defect", norm > 0 ? Rational(worst / norm) : Rational(0));
      r.passed = r.failures.empty();
      return r;
    }

    VerificationReport verify_violation(TranslateViolation const& v, std::size_t radius) {
      VerificationReport r;
      r.level       = VerificationLevel::window;
      auto const& G = v.f.group();
      Rational    sum_t = 0, sum_abs = 0;
      std::vector<std::pair<Rational, Element>> inv;
      for (auto const& [t, g] : v.items) {
        require_in(G, g);
        sum_t += t;
        sum_abs += abs_value(t);
        inv.emplace_back(t, G.inverse(g));
      }
      r.quantities.emplace_back("sum_t", sum_t);
      r.quantities.emplace_back("sum_abs_t", sum_abs);
      if (!(sum_t < 0)) {
        r.failures.push_back("coefficients sum to " + to_pq(sum_t) + ", not negative");
      }
      auto                    window = ball(G, radius);
      std::optional<Rational> lowest;
      for (auto const& layer : window.layers) {
        for (auto const& x : layer) {
          Rational value = 0;
          for (auto const& [t, ginv] : inv) {
            value += t * v.f(G.multiply(ginv, x));
          }
          if (!lowest || value < *lowest) {
            lowest = value;
          }
          if (value < 0 && !r.counterexample) {
            r.counterexample = x;
            r.failures.push_back("combination is " + to_pq(value) + " at " + G.format(x));
          }
        }
      }
      r.quantities.emplace_back("window_size", Rational(static_cast<long>(window.size())));
      r.quantities.emplace_back("min_value", lowest.value_or(Rational(0)));
      r.passed = r.failures.empty();
      return r;
    }

    VerificationReport verify_freeness(FreenessWitness const& w) {
      VerificationReport r;
      r.level    = VerificationLevel::global;
      auto again = free_to_depth(w.group, w.a, w.b, w.depth);
      r.quantities.emplace_back("depth", Rational(static_cast<long>(w.depth)));
      r.quantities.emplace_back("free", Rational(again.free ? 1 : 0));
      if (again.free != w.free) {
        r.failures.push_back(again.free ? "claimed collision does not occur"
                                        : "claimed free pair has colliding words");
      } else if (!w.free) {
        // Any genuine collision is accepted, not only the first one found.
        auto eval = [&](std::string const& word) {
          Element g = w.group.identity();
          for (char c : word) {
            g = w.group.multiply(g, c == 'a' ? w.a : w.b);
          }
          return g;
        };
        if (!w.collision || w.collision->first == w.collision->second
            || w.collision->first.size() > w.depth || w.collision->second.size() > w.depth
            || !(eval(w.collision->first) == eval(w.collision->second))) {
          r.failures.push_back("collision record is not a genuine collision");
        }
      }
      r.passed = r.failures.empty();
      return r;
    }

  }  // namespace

  VerificationReport verify_certificate(Certificate const& c, std::optional<std::size_t> window_radius) {
    return std::visit(
        [&](auto const& x) -> VerificationReport {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, RatioWitness>) {
            return verify_ratio(x);
          } else if constexpr (std::is_same_v<T, ReiterWitness>) {
            return verify_reiter(x);
          } else if constexpr (std::is_same_v<T, TranslateViolation>) {
            return verify_violation(x, window_radius.value_or(x.window_radius));
          } else {
            return verify_freeness(x);
          }
        },
        c);
  }

  TranslateViolation canonicalize(TranslateViolation v) {
    std::map<Element, Rational> merged;
    for (auto const& [t, g] : v.items) {
      merged[g] += t;
    }
    Rational sum = 0;
    for (auto const& [g, t] : merged) {
      sum += t;
    }
    if (!(sum < 0)) {
      throw PreconditionError("violation coefficients must have a negative sum");
    }
    Rational scale = -1 / sum;
    v.items.clear();
    for (auto const& [g, t] : merged) {
      if (t != 0) {
        v.items.emplace_back(t * scale, g);
      }
    }
    return v;
  }

  FreenessWitness free_to_depth(Group const& G, Element const& a, Element const& b, std::size_t N,
                                std::size_t cap) {
    if (N < 1) {
      throw PreconditionError("freeness depth must be at least 1");
    }
    require_in(G, a);
    require_in(G, b);
    if (N >= 62 || (std::size_t(1) << (N + 1)) - 2 > cap) {
      throw CapExceeded("2^(" + std::to_string(N) + "+1)-2 words exceed the cap of "
                        + std::to_string(cap));
    }
    FreenessWitness w{G, a, b, N, true, std::nullopt};
    std::unordered_map<std::string, std::string> seen;
    std::vector<std::pair<std::string, Element>> level{{"", G.identity()}};
    for (std::size_t len = 1; len <= N; ++len) {
      std::vector<std::pair<std::string, Element>> next;
      next.reserve(level.size() * 2);
      for (auto const& [word, g] : level) {
        for (char letter : {'a', 'b'}) {
          Element h = G.multiply(g, letter == 'a' ? a : b);
          auto    spelled = word + letter;
          auto [it, inserted] = seen.emplace(h.key(), spelled);
          if (!inserted) {
            w.free      = false;
            w.collision = std::make_pair(it->second, spelled);
            return w;
          }
          next.emplace_back(std::move(spelled), std::move(h));
        }
      }
      level = std::move(next);
    }
    return w;
  }

  VerificationReport structural_verify_semigroup_violation(TranslateViolation const& c) {
    // Locate the semigroup oracle, possibly behind a zero extension.
    std::shared_ptr<SemigroupOracle const> oracle;
    std::optional<Embedding>               embedding;
    if (auto const* s = std::get_if<SemigroupDescriptor>(&c.f.descriptor())) {
      oracle = s->oracle;
    } else if (auto const* z = std::get_if<ZeroExtensionDescriptor>(&c.f.descriptor())) {
      if (auto const* s2 = std::get_if<SemigroupDescriptor>(&z->inner->descriptor())) {
        oracle    = s2->oracle;
        embedding = z->embedding;
      }
    }
    if (!oracle) {
      throw PreconditionError("pattern mismatch: f is not a semigroup indicator");
    }
    auto const& H = embedding ? embedding->source() : c.f.group();

    auto canon = canonicalize(c);
    std::map<Element, Rational> expected{{H.identity(), 1}, {oracle->a(), -1}, {oracle->b(), -1}};
    std::map<Element, Rational> actual;
    for (auto const& [t, g] : canon.items) {
      auto h = embedding ? embedding->preimage(g) : std::optional<Element>(g);
      if (!h) {
        throw PreconditionError("pattern mismatch: item outside the embedded subgroup");
      }
      actual[*h] += t;
    }
    if (actual != expected) {
      throw PreconditionError("pattern mismatch: items are not (1,e),(-1,a),(-1,b)");
    }
    if (!oracle->has_first_letter()) {
      throw PreconditionError("freeness not established: no unique-spelling decoder for this pair");
    }
    std::size_t R = std::max<std::size_t>(c.window_radius, 1);
    auto        fw = free_to_depth(H, oracle->a(), oracle->b(), R + 1);
    if (!fw.free) {
      throw PreconditionError("freeness not established to depth " + std::to_string(R + 1));
    }

    auto report = verify_certificate(c);
    if (!report.passed) {
      return report;
    }
    // On members x of A in the window: a x and b x stay in A (prefix
    // closure) and their first letters are a and b respectively, so aA and
    // bA are disjoint because the first letter is a function of the element.
    std::size_t checked = 0;
    for (auto const& x : ball(H, R).elements()) {
      if (!oracle->contains(x)) {
        continue;
      }
      ++checked;
      auto ax = H.multiply(oracle->a(), x);
      auto bx = H.multiply(oracle->b(), x);
      if (!oracle->contains(ax) || !oracle->contains(bx)) {
        report.failures.push_back("semigroup not closed at " + H.format(x));
      } else if (oracle->first_letter(ax) != 0 || oracle->first_letter(bx) != 1) {
        report.failures.push_back("first letters overlap at " + H.format(x));
      }
    }
    report.quantities.emplace_back("free_depth", Rational(static_cast<long>(R + 1)));
    report.quantities.emplace_back("members_checked", Rational(static_cast<long>(checked)));
    report.passed = report.failures.empty();
    if (report.passed) {
      report.level = VerificationLevel::structural;
    }
    return report;
  }

  // ---------------------------------------------------------------- JSON

  namespace {

    std::string f_spec(TestFunction const& f) {
      if (f.spec().empty()) {
        throw UnsupportedError("test function has no spec string and cannot be serialized");
      }
      return f.spec();
    }

    Json weight_json(Weight const& u) {
      Json arr = Json::array();
      for (auto const& [x, v] : u.entries()) {
        arr.push_back(Json{{"x", u.group().format(x)}, {"value", to_pq(v)}});
      }
      return arr;
    }

    Json elements_json(Group const& G, std::vector<Element> const& xs) {
      Json arr = Json::array();
      for (auto const& x : xs) {
        arr.push_back(G.format(x));
      }
      return arr;
    }

    Json verification_json(VerificationReport const& r) {
      Json q = Json::object();
      for (auto const& [k, v] : r.quantities) {
        q[k] = to_pq(v);
      }
      return Json{{"level", to_string(r.level)},
                  {"passed", r.passed},
                  {"quantities", q},
                  {"failures", r.failures}};
    }

    Rational rational_field(Json const& j, char const* key) {
      return parse_rational(j.at(key).get<std::string>());
    }

    Weight weight_from(Group const& G, Json const& arr) {
      Weight u(G);
      for (auto const& e : arr) {
        u.add(G.parse_element(e.at("x").get<std::string>()), rational_field(e, "value"));
      }
      return u;
    }

    std::vector<Element> elements_from(Group const& G, Json const& arr) {
      std::vector<Element> out;
      for (auto const& e : arr) {
        out.push_back(G.parse_element(e.get<std::string>()));
      }
      return out;
    }

    VerificationLevel level_from(std::string const& s) {
      if (s == "window") {
        return VerificationLevel::window;
      }
      if (s == "structural") {
        return VerificationLevel::structural;
      }
      if (s == "global") {
        return VerificationLevel::global;
      }
      throw ParseError("unknown verification level '" + s + "'", 0);
    }

  }  // namespace

  Json to_json(Certificate const& c, VerificationReport const& report) {
    Json j;
    j["kind"]     = certificate_kind(c);
    auto const& G = certificate_group(c);
    j["group"]    = G.spec();
    std::visit(
        [&](auto const& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TranslateViolation>) {
            j["f"]     = f_spec(x.f);
            Json items = Json::array();
            for (auto const& [t, g] : x.items) {
              items.push_back(Json{{"t", to_pq(t)}, {"g", G.format(g)}});
            }
            j["items"]         = items;
            j["window_radius"] = x.window_radius;
            j["provenance"]    = x.provenance;
          } else if constexpr (std::is_same_v<T, RatioWitness>) {
            j["f"]          = f_spec(x.f);
            j["test_set"]   = elements_json(G, x.test_set);
            j["epsilon"]    = to_pq(x.epsilon);
            j["two_sided"]  = x.two_sided;
            j["p"]          = x.p;
            j["u"]          = weight_json(x.u);
            j["provenance"] = x.provenance;
          } else if constexpr (std::is_same_v<T, ReiterWitness>) {
            j["f"]          = f_spec(x.f);
            j["test_set"]   = elements_json(G, x.test_set);
            j["epsilon"]    = to_pq(x.epsilon);
            j["p"]          = x.p;
            j["u"]          = weight_json(x.u);
            j["provenance"] = x.provenance;
          } else {
            j["a"]     = G.format(x.a);
            j["b"]     = G.format(x.b);
            j["depth"] = x.depth;
            j["free"]  = x.free;
            j["collision"] =
                x.collision ? Json::array({x.collision->first, x.collision->second}) : Json(nullptr);
          }
        },
        c);
    j["verification"] = verification_json(report);
    return j;
  }

  std::string serialize(Certificate const& c, VerificationReport const& report) {
    return to_json(c, report).dump(2) + "\n";
  }

  LoadedCertificate certificate_from_json(Json const& j, PredicateRegistry const& registry) {
    try {
      auto  kind = j.at("kind").get<std::string>();
      Group G    = make_group(j.at("group").get<std::string>());
      auto  prov = [&] {
        return j.contains("provenance") ? j.at("provenance").get<std::vector<std::string>>()
                                         : std::vector<std::string>{};
      };
      Json stored = j.contains("verification") ? j.at("verification") : Json::object();
      if (kind == "translate_violation") {
        auto               f = parse_test_function(G, j.at("f").get<std::string>(), registry);
        TranslateViolation v{f, {}, j.at("window_radius").get<std::size_t>(),
                             VerificationLevel::window, prov()};
        for (auto const& item : j.at("items")) {
          v.items.emplace_back(rational_field(item, "t"),
                               G.parse_element(item.at("g").get<std::string>()));
        }
        if (stored.contains("level")) {
          v.level = level_from(stored.at("level").get<std::string>());
        }
        return {v, stored};
      }
      if (kind == "ratio_witness") {
        auto f = parse_test_function(G, j.at("f").get<std::string>(), registry);
        RatioWitness w{f,
                       elements_from(G, j.at("test_set")),
                       rational_field(j, "epsilon"),
                       weight_from(G, j.at("u")),
                       j.at("two_sided").get<bool>(),
                       j.at("p").get<unsigned>(),
                       prov()};
        return {w, stored};
      }
      if (kind == "reiter_witness") {
        auto f = parse_test_function(G, j.at("f").get<std::string>(), registry);
        ReiterWitness w{f,
                        elements_from(G, j.at("test_set")),
                        rational_field(j, "epsilon"),
                        weight_from(G, j.at("u")),
                        j.at("p").get<unsigned>(),
                        prov()};
        return {w, stored};
      }
      if (kind == "freeness_witness") {
        FreenessWitness w{G,
                          G.parse_element(j.at("a").get<std::string>()),
                          G.parse_element(j.at("b").get<std::string>()),
                          j.at("depth").get<std::size_t>(),
                          j.at("free").get<bool>(),
                          std::nullopt};
        if (!j.at("collision").is_null()) {
          auto const& pair = j.at("collision");
          w.collision      = std::make_pair(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
        }
        return {w, stored};
      }
      throw ParseError("unknown certificate kind '" + kind + "'", 0);
    } catch (nlohmann::json::exception const& e) {
      throw ParseError(std::string("malformed certificate: ") + e.what(), 0);
    }
  }

  VerificationReport verify_json(Json const& j, PredicateRegistry const& registry) {
    auto               loaded = certificate_from_json(j, registry);
    VerificationReport report;
    auto const*        violation = std::get_if<TranslateViolation>(&loaded.certificate);
    if (violation && violation->level == VerificationLevel::structural) {
      try {
        report = structural_verify_semigroup_violation(*violation);
      } catch (PreconditionError const& e) {
        report = verify_certificate(loaded.certificate);
        report.failures.push_back(std::string("structural check failed: ") + e.what());
        report.passed = false;
      }
    } else {
      report = verify_certificate(loaded.certificate);
    }

    auto const& stored = loaded.stored_verification;
    auto        recomputed = verification_json(report);
    if (!stored.contains("passed") || stored.at("passed") != recomputed.at("passed")) {
      report.failures.push_back("stored pass flag differs from the recomputation");
    }
    if (!stored.contains("level") || stored.at("level") != recomputed.at("level")) {
      report.failures.push_back("stored level differs from the recomputation");
    }
    if (!stored.contains("quantities") || stored.at("quantities") != recomputed.at("quantities")) {
      report.failures.push_back("stored quantities differ from the recomputation");
    }
    report.passed = report.failures.empty();
    return report;
  }

}  // namespace conelab
