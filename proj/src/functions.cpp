#include "conelab/functions.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_set>

#include "conelab/errors.hpp"

namespace conelab {

  namespace {

    void require_same_group(Group const& a, Group const& b, char const* what) {
      if (!(a == b)) {
        throw GroupMismatch(std::string(what) + ": " + a.spec() + " vs " + b.spec());
      }
    }

    void require_owned(Group const& G, Element const& x) {
      if (!G.owns(x)) {
        throw GroupMismatch("element " + x.key() + " does not belong to " + G.spec());
      }
    }

    std::int64_t parse_int(std::string_view text, std::size_t offset) {
      std::int64_t value = 0;
      auto const*  first = text.data();
      auto const*  last  = text.data() + text.size();
      if (first != last && *first == '+') {
        ++first;
      }
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || text.empty()) {
        throw ParseError("expected an integer", offset);
      }
      return value;
    }

    bool is_integer(Rational const& q) {
      return q.get_den() == 1;
    }

  }  // namespace

  // ---------------------------------------------------------------- Weight

  Weight Weight::dirac(Group group, Element const& at, Rational const& value) {
    Weight w(std::move(group));
    w.set(at, value);
    return w;
  }

  Rational Weight::value_at(Element const& x) const {
    auto it = entries_.find(x);
    return it == entries_.end() ? Rational(0) : it->second;
  }

  void Weight::add(Element const& x, Rational const& value) {
    require_owned(group_, x);
    if (value == 0) {
      return;
    }
    auto [it, inserted] = entries_.try_emplace(x, value);
    if (!inserted) {
      it->second += value;
      if (it->second == 0) {
        entries_.erase(it);
      }
    }
  }

  void Weight::set(Element const& x, Rational const& value) {
    require_owned(group_, x);
    if (value == 0) {
      entries_.erase(x);
    } else {
      entries_.insert_or_assign(x, value);
    }
  }

  bool Weight::is_nonnegative() const {
    return std::all_of(entries_.begin(), entries_.end(), [](auto const& e) { return e.second > 0; });
  }

  Rational Weight::l1_mass() const {
    Rational total = 0;
    for (auto const& [x, v] : entries_) {
      total += abs_value(v);
    }
    return total;
  }

  // ------------------------------------------------------------- Embedding

  Embedding::Embedding(Kind kind, Group source, Group target, std::int64_t param, std::string spec)
      : kind_(kind),
        source_(std::move(source)),
        target_(std::move(target)),
        param_(param),
        spec_(std::move(spec)) {}

  Embedding Embedding::identity(Group const& G) {
    return Embedding(Kind::identity, G, G, 0, "id");
  }

  Embedding Embedding::product_factor(Group const& product, std::size_t index) {
    if (product.kind() != GroupKind::direct_product) {
      throw UnsupportedError("factor embedding needs a direct product, got " + product.spec());
    }
    return Embedding(Kind::product_factor,
                     product.factor(index),
                     product,
                     static_cast<std::int64_t>(index),
                     "factor:" + std::to_string(index + 1));
  }

  Embedding Embedding::lattice_coordinates(Group const& lattice, std::size_t k) {
    if (lattice.kind() != GroupKind::integer_lattice || k == 0
        || static_cast<std::int64_t>(k) > lattice.parameter()) {
      throw UnsupportedError("no coordinate embedding of Z^" + std::to_string(k) + " into "
                             + lattice.spec());
    }
    return Embedding(Kind::lattice_coordinates,
                     Group::integer_lattice(k),
                     lattice,
                     static_cast<std::int64_t>(k),
                     "coords:" + std::to_string(k));
  }

  Embedding Embedding::lattice_scaling(Group const& lattice, std::int64_t m) {
    if (lattice.kind() != GroupKind::integer_lattice || m < 1) {
      throw UnsupportedError("no scaling embedding by " + std::to_string(m) + " into "
                             + lattice.spec());
    }
    return Embedding(Kind::lattice_scaling, lattice, lattice, m, "scale:" + std::to_string(m));
  }

  Embedding Embedding::dihedral_translations(Group const& dihedral) {
    if (dihedral.kind() != GroupKind::infinite_dihedral) {
      throw UnsupportedError("translation subgroup needs Dinf, got " + dihedral.spec());
    }
    return Embedding(Kind::dihedral_translations, Group::integer_lattice(1), dihedral, 0,
                     "translations");
  }

  Embedding Embedding::parse(Group const& target, std::string_view spec) {
    auto param = [&](std::string_view prefix) -> std::optional<std::int64_t> {
      if (spec.substr(0, prefix.size()) != prefix) {
        return std::nullopt;
      }
      return parse_int(spec.substr(prefix.size()), prefix.size());
    };
    if (spec == "id") {
      return identity(target);
    }
    if (spec == "translations") {
      return dihedral_translations(target);
    }
    if (auto i = param("factor:")) {
      if (*i != 1 && *i != 2) {
        throw UnsupportedError("factor index must be 1 or 2");
      }
      return product_factor(target, static_cast<std::size_t>(*i - 1));
    }
    if (auto k = param("coords:")) {
      if (*k < 1) {
        throw UnsupportedError("coordinate count must be positive");
      }
      return lattice_coordinates(target, static_cast<std::size_t>(*k));
    }
    if (auto m = param("scale:")) {
      return lattice_scaling(target, *m);
    }
    throw UnsupportedError("unsupported embedding '" + std::string(spec) + "'");
  }

  Element Embedding::map(Element const& h) const {
    require_owned(source_, h);
    switch (kind_) {
      case Kind::identity:
        return h;
      case Kind::product_factor:
        return param_ == 0 ? target_.pair(h, target_.factor(1).identity())
                           : target_.pair(target_.factor(0).identity(), h);
      case Kind::lattice_coordinates: {
        auto coords = std::get<LatticeForm>(h.form()).coords;
        coords.resize(static_cast<std::size_t>(target_.parameter()), 0);
        return Element(LatticeForm{std::move(coords)});
      }
      case Kind::lattice_scaling: {
        auto coords = std::get<LatticeForm>(h.form()).coords;
        for (auto& c : coords) {
          c *= param_;
        }
        return Element(LatticeForm{std::move(coords)});
      }
      case Kind::dihedral_translations:
        return Element(DihedralForm{std::get<LatticeForm>(h.form()).coords.at(0), false});
    }
    throw Error("unreachable embedding kind");
  }

  std::optional<Element> Embedding::preimage(Element const& g) const {
    require_owned(target_, g);
    switch (kind_) {
      case Kind::identity:
        return g;
      case Kind::product_factor: {
        auto const& parts = std::get<PairForm>(g.form()).factors;
        auto const  other = param_ == 0 ? 1 : 0;
        if (!(parts[other] == target_.factor(other).identity())) {
          return std::nullopt;
        }
        return parts[static_cast<std::size_t>(param_)];
      }
      case Kind::lattice_coordinates: {
        auto const& coords = std::get<LatticeForm>(g.form()).coords;
        auto        k      = static_cast<std::size_t>(param_);
        for (std::size_t i = k; i < coords.size(); ++i) {
          if (coords[i] != 0) {
            return std::nullopt;
          }
        }
        return Element(LatticeForm{{coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(k)}});
      }
      case Kind::lattice_scaling: {
        auto coords = std::get<LatticeForm>(g.form()).coords;
        for (auto& c : coords) {
          if (c % param_ != 0) {
            return std::nullopt;
          }
          c /= param_;
        }
        return Element(LatticeForm{std::move(coords)});
      }
      case Kind::dihedral_translations: {
        auto const& d = std::get<DihedralForm>(g.form());
        if (d.reflect) {
          return std::nullopt;
        }
        return Element(LatticeForm{{d.shift}});
      }
    }
    throw Error("unreachable embedding kind");
  }

  // ------------------------------------------------------- SemigroupOracle

  namespace {

    std::optional<int> single_letter(Element const& x) {
      auto const* w = std::get_if<ReducedWordForm>(&x.form());
      if (w == nullptr || w->letters.size() != 1) {
        return std::nullopt;
      }
      return w->letters[0];
    }

    // Digit d when x is the map z -> m z + d with 0 <= d < m.
    std::optional<std::int64_t> affine_digit(Element const& x, std::int64_t m) {
      auto const& f = std::get<AffineForm>(x.form());
      if (f.exponent != 1 || !is_integer(f.shift) || f.shift < 0 || f.shift >= m) {
        return std::nullopt;
      }
      return f.shift.get_num().get_si();
    }

  }  // namespace

  SemigroupOracle::SemigroupOracle(Group group, Element a, Element b, std::size_t depth_cap)
      : group_(std::move(group)),
        a_(std::move(a)),
        b_(std::move(b)),
        pattern_(Pattern::bounded_search) {
    require_owned(group_, a_);
    require_owned(group_, b_);
    switch (group_.kind()) {
      case GroupKind::free_group: {
        auto la = single_letter(a_);
        auto lb = single_letter(b_);
        if (la && lb && *la != *lb && *la != -*lb) {
          pattern_ = Pattern::free_letters;
          digit_a_ = *la;
          digit_b_ = *lb;
        }
        break;
      }
      case GroupKind::lamplighter: {
        Element t(LamplighterForm{{}, 1});
        Element at(LamplighterForm{{0}, 1});
        if ((a_ == t && b_ == at) || (a_ == at && b_ == t)) {
          pattern_    = Pattern::lamplighter_walk;
          a_is_shift_ = a_ == t;
        }
        break;
      }
      case GroupKind::baumslag_solitar: {
        auto m  = group_.parameter();
        auto da = affine_digit(a_, m);
        auto db = affine_digit(b_, m);
        if (da && db && *da != *db) {
          pattern_ = Pattern::affine_digits;
          digit_a_ = *da;
          digit_b_ = *db;
        } else if (a_ == Element(AffineForm{1, 0}) && b_ == Element(AffineForm{0, 1})) {
          pattern_ = Pattern::affine_generators;
        }
        break;
      }
      default:
        break;
    }
    if (pattern_ != Pattern::bounded_search) {
      return;
    }
    std::set<std::string> keys;
    std::vector<Element>  frontier{a_, b_};
    for (std::size_t depth = 1; depth <= depth_cap && !frontier.empty(); ++depth) {
      std::vector<Element> next;
      for (auto const& w : frontier) {
        keys.insert(w.key());
        if (depth < depth_cap) {
          next.push_back(group_.multiply(w, a_));
          next.push_back(group_.multiply(w, b_));
        }
      }
      frontier = std::move(next);
    }
    words_ = std::make_shared<std::vector<std::string> const>(keys.begin(), keys.end());
  }

  bool SemigroupOracle::contains(Element const& x) const {
    require_owned(group_, x);
    switch (pattern_) {
      case Pattern::free_letters: {
        auto const& letters = std::get<ReducedWordForm>(x.form()).letters;
        return !letters.empty() && std::all_of(letters.begin(), letters.end(), [&](int l) {
          return l == digit_a_ || l == digit_b_;
        });
      }
      case Pattern::lamplighter_walk: {
        auto const& f = std::get<LamplighterForm>(x.form());
        return f.cursor >= 1
            && std::all_of(f.lamps.begin(), f.lamps.end(), [&](std::int64_t p) {
                 return p >= 0 && p < f.cursor;
               });
      }
      case Pattern::affine_digits: {
        auto const& f = std::get<AffineForm>(x.form());
        if (f.exponent < 1 || !is_integer(f.shift) || f.shift < 0) {
          return false;
        }
        Integer c = f.shift.get_num();
        Integer m = group_.parameter();
        for (std::int64_t i = 0; i < f.exponent; ++i) {
          Integer d = c % m;
          if (d != digit_a_ && d != digit_b_) {
            return false;
          }
          c /= m;
        }
        return c == 0;
      }
      case Pattern::affine_generators: {
        auto const& f = std::get<AffineForm>(x.form());
        return f.exponent >= 0 && is_integer(f.shift) && f.shift >= 0
            && !(f.exponent == 0 && f.shift == 0);
      }
      case Pattern::bounded_search:
        return std::binary_search(words_->begin(), words_->end(), x.key());
    }
    return false;
  }

  bool SemigroupOracle::has_first_letter() const noexcept {
    return pattern_ == Pattern::free_letters || pattern_ == Pattern::lamplighter_walk
        || pattern_ == Pattern::affine_digits;
  }

  std::optional<int> SemigroupOracle::first_letter(Element const& x) const {
    if (!has_first_letter()) {
      throw UnsupportedError("no first-letter decoder for this generator pair");
    }
    if (!contains(x)) {
      return std::nullopt;
    }
    switch (pattern_) {
      case Pattern::free_letters:
        return std::get<ReducedWordForm>(x.form()).letters.front() == digit_a_ ? 0 : 1;
      case Pattern::lamplighter_walk: {
        auto const& lamps   = std::get<LamplighterForm>(x.form()).lamps;
        bool        lit     = !lamps.empty() && lamps.front() == 0;
        bool        first_t = !lit;
        return first_t == a_is_shift_ ? 0 : 1;
      }
      case Pattern::affine_digits: {
        Integer d = std::get<AffineForm>(x.form()).shift.get_num() % Integer(group_.parameter());
        return d == digit_a_ ? 0 : 1;
      }
      default:
        break;
    }
    throw UnsupportedError("no first-letter decoder for this generator pair");
  }

  // ---------------------------------------------------------- TestFunction

  TestFunction::TestFunction(Group group, Descriptor descriptor, Rational bound, Oracle oracle,
                             std::string spec)
      : group_(std::move(group)),
        descriptor_(std::move(descriptor)),
        bound_(std::move(bound)),
        oracle_(std::move(oracle)),
        spec_(std::move(spec)) {
    if (bound_ < 0) {
      throw PreconditionError("test function bound must be nonnegative");
    }
  }

  Rational TestFunction::operator()(Element const& x) const {
    require_owned(group_, x);
    return oracle_(x);
  }

  bool TestFunction::window_only() const {
    return std::visit(
        [](auto const& d) -> bool {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, CustomDescriptor>) {
            return true;
          } else if constexpr (std::is_same_v<D, SemigroupDescriptor>) {
            return !d.oracle->exact();
          } else if constexpr (std::is_same_v<D, ZeroExtensionDescriptor>
                               || std::is_same_v<D, ConvolvedDescriptor>
                               || std::is_same_v<D, OrbitSumDescriptor>) {
            return d.inner->window_only();
          } else {
            return false;
          }
        },
        descriptor_);
  }

  TestFunction constant_function(Group const& G, Rational const& value) {
    if (value < 0) {
      throw PreconditionError("constant test function must be nonnegative");
    }
    return TestFunction(G, ConstantDescriptor{value}, value,
                        [value](Element const&) { return value; }, "const:" + to_pq(value));
  }

  TestFunction half_space(Group const& G, std::vector<std::int64_t> normal) {
    if (G.kind() != GroupKind::integer_lattice
        || static_cast<std::int64_t>(normal.size()) != G.parameter()) {
      throw PreconditionError("half-space needs a normal vector of length d on Z^d");
    }
    std::string spec = "half:" + G.spec() + ":";
    for (std::size_t i = 0; i < normal.size(); ++i) {
      spec += (i ? "," : "") + std::to_string(normal[i]);
    }
    auto oracle = [normal](Element const& x) {
      auto const& c   = std::get<LatticeForm>(x.form()).coords;
      Integer     dot = 0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        dot += Integer(static_cast<long>(normal[i])) * Integer(static_cast<long>(c[i]));
      }
      return Rational(dot >= 0 ? 1 : 0);
    };
    return TestFunction(G, HalfSpaceDescriptor{std::move(normal)}, 1, oracle, std::move(spec));
  }

  TestFunction subgroup_indicator(Embedding const& embedding) {
    auto oracle = [embedding](Element const& x) {
      return Rational(embedding.preimage(x) ? 1 : 0);
    };
    return TestFunction(embedding.target(), SubgroupDescriptor{embedding}, 1, oracle,
                        "subgroup:" + embedding.spec());
  }

  TestFunction ball_indicator(Group const& G, std::span<Element const> S, std::size_t radius) {
    auto table  = std::make_shared<BallTable const>(ball(G, S, radius));
    auto oracle = [table](Element const& x) { return Rational(table->contains(x) ? 1 : 0); };
    std::vector<Element> gens(S.begin(), S.end());
    bool                 standard = symmetrize(G, S) == G.generators();
    return TestFunction(G, BallDescriptor{std::move(gens), radius}, 1, oracle,
                        standard ? "ball:" + std::to_string(radius) : std::string());
  }

  TestFunction semigroup_indicator(Group const& G, Element const& a, Element const& b) {
    auto oracle = std::make_shared<SemigroupOracle const>(G, a, b);
    auto eval   = [oracle](Element const& x) { return Rational(oracle->contains(x) ? 1 : 0); };
    return TestFunction(G, SemigroupDescriptor{oracle}, 1, eval,
                        "semigroup:" + G.format(a) + "," + G.format(b));
  }

  TestFunction custom_function(Group const& G, std::string const& name,
                               TestFunction::Oracle oracle, Rational const& bound) {
    auto checked = [oracle = std::move(oracle), bound, name](Element const& x) {
      Rational v = oracle(x);
      if (v < 0 || v > bound) {
        throw PreconditionError("custom predicate '" + name + "' left [0, bound] at " + x.key());
      }
      return v;
    };
    return TestFunction(G, CustomDescriptor{name}, bound, checked, "custom:" + name);
  }

  // ----------------------------------------------------- PredicateRegistry

  PredicateRegistry::PredicateRegistry() {
    add("a-prefix",
        {[](Group const& G) { return G.kind() == GroupKind::free_group; },
         [](Group const&, Element const& x) {
           auto const& w = std::get<ReducedWordForm>(x.form()).letters;
           return Rational(!w.empty() && w.front() == 1 ? 1 : 0);
         },
         1});
    add("even",
        {[](Group const& G) { return G.kind() == GroupKind::integer_lattice; },
         [](Group const&, Element const& x) {
           std::int64_t sum = 0;
           for (auto c : std::get<LatticeForm>(x.form()).coords) {
             sum += c;
           }
           return Rational(sum % 2 == 0 ? 1 : 0);
         },
         1});
  }

  void PredicateRegistry::add(std::string const& name, Entry entry) {
    entries_.insert_or_assign(name, std::move(entry));
  }

  void PredicateRegistry::add_finite_support(std::string const& name, Group const& G,
                                             std::vector<Element> const& support,
                                             Rational const& value) {
    if (value < 0) {
      throw PreconditionError("predicate value must be nonnegative");
    }
    auto keys = std::make_shared<std::unordered_set<std::string>>();
    for (auto const& x : support) {
      require_owned(G, x);
      keys->insert(x.key());
    }
    auto spec = G.spec();
    add(name, {[spec](Group const& H) { return H.spec() == spec; },
               [keys, value](Group const&, Element const& x) {
                 return keys->count(x.key()) ? value : Rational(0);
               },
               value});
  }

  TestFunction PredicateRegistry::make(Group const& G, std::string const& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw UnsupportedError("unknown predicate '" + name + "'");
    }
    if (!it->second.applies(G)) {
      throw UnsupportedError("predicate '" + name + "' does not apply to " + G.spec());
    }
    auto value = it->second.value;
    return custom_function(G, name, [G, value](Element const& x) { return value(G, x); },
                           it->second.bound);
  }

  // ---------------------------------------------------------------- parser

  namespace {

    TestFunction parse_at(Group const& G, std::string_view spec, std::size_t offset,
                          PredicateRegistry const& registry);

    Embedding parse_embedding_at(Group const& G, std::string_view text, std::size_t offset) {
      try {
        return Embedding::parse(G, text);
      } catch (ParseError const& e) {
        throw ParseError(e.detail(), offset + e.position());
      }
    }

    TestFunction parse_at(Group const& G, std::string_view spec, std::size_t offset,
                          PredicateRegistry const& registry) {
      auto colon = spec.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected '<kind>:<arguments>'", offset);
      }
      auto kind = spec.substr(0, colon);
      auto rest = spec.substr(colon + 1);
      auto at   = offset + colon + 1;

      if (kind == "const") {
        try {
          return constant_function(G, parse_rational(rest));
        } catch (ParseError const& e) {
          throw ParseError(e.detail(), at + e.position());
        }
      }
      if (kind == "half") {
        auto sep = rest.find(':');
        if (sep == std::string_view::npos) {
          throw ParseError("expected half:<group>:<normal>", at);
        }
        Group H = [&] {
          try {
            return make_group(rest.substr(0, sep));
          } catch (ParseError const& e) {
            throw ParseError(e.detail(), at + e.position());
          }
        }();
        if (!(H == G)) {
          throw GroupMismatch("half-space is on " + H.spec() + ", query group is " + G.spec());
        }
        std::vector<std::int64_t> normal;
        std::size_t               start = sep + 1;
        while (true) {
          auto comma = rest.find(',', start);
          auto end   = comma == std::string_view::npos ? rest.size() : comma;
          normal.push_back(parse_int(rest.substr(start, end - start), at + start));
          if (comma == std::string_view::npos) {
            break;
          }
          start = comma + 1;
        }
        try {
          return half_space(G, std::move(normal));
        } catch (PreconditionError const& e) {
          throw ParseError(e.what(), at + sep + 1);
        }
      }
      if (kind == "ball") {
        auto R = parse_int(rest, at);
        if (R < 0) {
          throw ParseError("radius must be nonnegative", at);
        }
        return ball_indicator(G, G.generators(), static_cast<std::size_t>(R));
      }
      if (kind == "subgroup") {
        return subgroup_indicator(parse_embedding_at(G, rest, at));
      }
      if (kind == "semigroup") {
        std::vector<Element> pair;
        try {
          pair = G.parse_elements(rest);
        } catch (ParseError const& e) {
          throw ParseError(e.detail(), at + e.position());
        }
        if (pair.size() != 2) {
          throw ParseError("semigroup needs exactly two elements", at);
        }
        return semigroup_indicator(G, pair[0], pair[1]);
      }
      if (kind == "custom") {
        return registry.make(G, std::string(rest));
      }
      if (kind == "zext") {
        // The embedding is one token ("id", "translations") or two
        // ("factor:1", "coords:2", "scale:3").
        std::size_t cut = rest.find(':');
        if (cut == std::string_view::npos) {
          throw ParseError("expected zext:<embedding>:<function>", at);
        }
        auto head = rest.substr(0, cut);
        if (head == "factor" || head == "coords" || head == "scale") {
          cut = rest.find(':', cut + 1);
          if (cut == std::string_view::npos) {
            throw ParseError("expected zext:<embedding>:<function>", at);
          }
        }
        auto embedding = parse_embedding_at(G, rest.substr(0, cut), at);
        auto inner     = parse_at(embedding.source(), rest.substr(cut + 1), at + cut + 1, registry);
        return zero_extension(inner, embedding);
      }
      throw ParseError("unknown function kind '" + std::string(kind) + "'", offset);
    }

  }  // namespace

  TestFunction parse_test_function(Group const& G, std::string_view spec,
                                   PredicateRegistry const& registry) {
    return parse_at(G, spec, 0, registry);
  }

  // ------------------------------------------------------------- operators

  Weight translate(Element const& g, Weight const& u) {
    require_owned(u.group(), g);
    auto const& G = u.group();
    Weight      out(G);
    for (auto const& [y, v] : u.entries()) {
      out.set(G.multiply(g, y), v);
    }
    return out;
  }

  TestFunction translate(Element const& g, TestFunction const& f) {
    std::vector<Element> one{g};
    return orbit_sum(f, one);
  }

  Rational weighted_norm(Weight const& u, TestFunction const& f, unsigned p) {
    if (p == 0) {
      throw PreconditionError("weighted_norm needs p >= 1");
    }
    require_same_group(u.group(), f.group(), "weighted_norm");
    Rational total = 0;
    for (auto const& [x, v] : u.entries()) {
      Rational term = abs_value(v) * f(x);
      total += p == 1 ? term : power(term, p);
    }
    return total;
  }

  TestFunction convolve(Weight const& rho, TestFunction const& f) {
    if (!rho.is_nonnegative()) {
      throw PreconditionError("convolution weight must be nonnegative");
    }
    auto const& G = f.group();
    auto const& H = rho.group();
    auto        embedding = [&]() -> Embedding {
      if (H == G) {
        return Embedding::identity(G);
      }
      if (G.kind() == GroupKind::direct_product) {
        if (G.factor(1) == H) {
          return Embedding::product_factor(G, 1);
        }
        if (G.factor(0) == H) {
          return Embedding::product_factor(G, 0);
        }
      }
      throw PreconditionError(G.spec() + " is not a direct product with factor " + H.spec());
    }();
    // Precompute the inverses of the images once.
    std::vector<std::pair<Element, Rational>> terms;
    for (auto const& [y, v] : rho.entries()) {
      terms.emplace_back(G.inverse(embedding.map(y)), v);
    }
    auto inner  = std::make_shared<TestFunction const>(f);
    auto oracle = [terms, inner, G](Element const& x) {
      Rational total = 0;
      for (auto const& [yinv, v] : terms) {
        total += v * (*inner)(G.multiply(yinv, x));
      }
      return total;
    };
    return TestFunction(G,
                        ConvolvedDescriptor{std::make_shared<Weight const>(rho), inner, embedding},
                        rho.l1_mass() * f.bound(), oracle, "");
  }

  Weight orbit_sum(Weight const& v, std::span<Element const> elements) {
    if (elements.empty()) {
      throw PreconditionError("orbit_sum needs at least one element");
    }
    Weight out(v.group());
    for (auto const& r : elements) {
      auto moved = translate(r, v);
      for (auto const& [x, value] : moved.entries()) {
        out.add(x, value);
      }
    }
    return out;
  }

  TestFunction orbit_sum(TestFunction const& f, std::span<Element const> elements) {
    if (elements.empty()) {
      throw PreconditionError("orbit_sum needs at least one element");
    }
    auto const&          G = f.group();
    std::vector<Element> inverses;
    for (auto const& r : elements) {
      require_owned(G, r);
      inverses.push_back(G.inverse(r));
    }
    auto inner  = std::make_shared<TestFunction const>(f);
    auto oracle = [inverses, inner, G](Element const& x) {
      Rational total = 0;
      for (auto const& rinv : inverses) {
        total += (*inner)(G.multiply(rinv, x));
      }
      return total;
    };
    return TestFunction(G,
                        OrbitSumDescriptor{{elements.begin(), elements.end()}, inner},
                        f.bound() * Rational(static_cast<long>(elements.size())), oracle, "");
  }

  TestFunction zero_extension(TestFunction const& f, Embedding const& embedding) {
    require_same_group(f.group(), embedding.source(), "zero_extension");
    auto inner  = std::make_shared<TestFunction const>(f);
    auto oracle = [inner, embedding](Element const& x) {
      auto h = embedding.preimage(x);
      return h ? (*inner)(*h) : Rational(0);
    };
    std::string spec = f.spec().empty() ? "" : "zext:" + embedding.spec() + ":" + f.spec();
    return TestFunction(embedding.target(), ZeroExtensionDescriptor{inner, embedding}, f.bound(),
                        oracle, std::move(spec));
  }

}  // namespace conelab
