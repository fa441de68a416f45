#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conelab/ball.hpp"
#include "conelab/group.hpp"
#include "conelab/rational.hpp"

namespace conelab {

  // Finitely supported rational function on a group.  Stored entries are
  // always nonzero and iterate in canonical-key order.
  class Weight {
   public:
    explicit Weight(Group group) : group_(std::move(group)) {}

    static Weight dirac(Group group, Element const& at, Rational const& value = 1);

    Group const& group() const noexcept {
      return group_;
    }

    std::map<Element, Rational> const& entries() const noexcept {
      return entries_;
    }

    Rational value_at(Element const& x) const;
    void     add(Element const& x, Rational const& value);
    void     set(Element const& x, Rational const& value);

    bool empty() const noexcept {
      return entries_.empty();
    }

    std::size_t size() const noexcept {
      return entries_.size();
    }

    bool     is_nonnegative() const;
    Rational l1_mass() const;

    friend bool operator==(Weight const& a, Weight const& b) {
      return a.group_ == b.group_ && a.entries_ == b.entries_;
    }

   private:
    Group                       group_;
    std::map<Element, Rational> entries_;
  };

  // Injective homomorphism H -> G from the supported catalog, with decidable
  // image membership.
  class Embedding {
   public:
    enum class Kind { identity, product_factor, lattice_coordinates, lattice_scaling,
                      dihedral_translations };

    static Embedding identity(Group const& G);
    // index 0 = left factor, 1 = right factor.
    static Embedding product_factor(Group const& product, std::size_t index);
    // Z^k -> Z^d onto the first k coordinates.
    static Embedding lattice_coordinates(Group const& lattice, std::size_t k);
    // Z^d -> Z^d, x -> m x (image m Z^d, finite index).
    static Embedding lattice_scaling(Group const& lattice, std::int64_t m);
    // Z -> Dinf onto the index-two translation subgroup.
    static Embedding dihedral_translations(Group const& dihedral);

    // "id", "factor:1", "factor:2", "coords:<k>", "scale:<m>", "translations".
    // Throws UnsupportedError for anything else.
    static Embedding parse(Group const& target, std::string_view spec);

    Kind kind() const noexcept {
      return kind_;
    }

    Group const& source() const noexcept {
      return source_;
    }

    Group const& target() const noexcept {
      return target_;
    }

    std::string const& spec() const noexcept {
      return spec_;
    }

    Element                map(Element const& h) const;
    std::optional<Element> preimage(Element const& g) const;

   private:
    Embedding(Kind kind, Group source, Group target, std::int64_t param, std::string spec);

    Kind         kind_;
    Group        source_;
    Group        target_;
    std::int64_t param_;
    std::string  spec_;
  };

  // Membership in the semigroup A generated by {a, b} (nonempty words).
  //
  // Catalog pairs are decided exactly from normal forms:
  //   * two distinct letters of a free group, not inverse to each other;
  //   * the lamplighter pair {t, a*t};
  //   * BS(1,m) digit pairs x -> m x + d with distinct digits 0 <= d < m;
  //   * the BS(1,m) generator pair (a, b).
  // Other pairs fall back to enumerating all words up to `depth_cap`, which
  // only approximates A.
  class SemigroupOracle {
   public:
    enum class Pattern { free_letters, lamplighter_walk, affine_digits, affine_generators,
                         bounded_search };

    SemigroupOracle(Group group, Element a, Element b, std::size_t depth_cap = 12);

    bool contains(Element const& x) const;

    Pattern pattern() const noexcept {
      return pattern_;
    }

    bool exact() const noexcept {
      return pattern_ != Pattern::bounded_search;
    }

    // For free catalog patterns: the first letter (0 for a, 1 for b) of the
    // unique word spelling x, or nullopt when x is not in A.  Throws
    // UnsupportedError for patterns without unique spelling.
    std::optional<int> first_letter(Element const& x) const;

    bool has_first_letter() const noexcept;

    Element const& a() const noexcept {
      return a_;
    }

    Element const& b() const noexcept {
      return b_;
    }

   private:
    Group                                         group_;
    Element                                       a_;
    Element                                       b_;
    Pattern                                       pattern_;
    std::int64_t                                  digit_a_ = 0;
    std::int64_t                                  digit_b_ = 0;
    bool                                          a_is_shift_ = false;  // lamplighter: a == t
    std::shared_ptr<std::vector<std::string> const> words_;             // sorted keys
  };

  class TestFunction;

  struct ConstantDescriptor {
    Rational value;
  };
  // 1 where <normal, x> >= 0.
  struct HalfSpaceDescriptor {
    std::vector<std::int64_t> normal;
  };
  struct SubgroupDescriptor {
    Embedding embedding;
  };
  struct BallDescriptor {
    std::vector<Element> generators;
    std::size_t          radius;
  };
  struct SemigroupDescriptor {
    std::shared_ptr<SemigroupOracle const> oracle;
  };
  struct ZeroExtensionDescriptor {
    std::shared_ptr<TestFunction const> inner;
    Embedding                           embedding;
  };
  struct ConvolvedDescriptor {
    std::shared_ptr<Weight const>       rho;
    std::shared_ptr<TestFunction const> inner;
    Embedding                           embedding;  // rho's group into inner's
  };
  // x -> sum over r of inner(r^-1 x).
  struct OrbitSumDescriptor {
    std::vector<Element>                elements;
    std::shared_ptr<TestFunction const> inner;
  };
  struct CustomDescriptor {
    std::string name;
  };

  using Descriptor = std::variant<ConstantDescriptor,
                                  HalfSpaceDescriptor,
                                  SubgroupDescriptor,
                                  BallDescriptor,
                                  SemigroupDescriptor,
                                  ZeroExtensionDescriptor,
                                  ConvolvedDescriptor,
                                  OrbitSumDescriptor,
                                  CustomDescriptor>;

  // Bounded nonnegative rational function on a group: an oracle plus the
  // descriptor it was built from.  Custom predicates and bounded-search
  // semigroups are only meaningful on finite windows.
  class TestFunction {
   public:
    using Oracle = std::function<Rational(Element const&)>;

    TestFunction(Group group, Descriptor descriptor, Rational bound, Oracle oracle, std::string spec);

    // Throws GroupMismatch for foreign elements.
    Rational operator()(Element const& x) const;

    Group const& group() const noexcept {
      return group_;
    }

    Rational const& bound() const noexcept {
      return bound_;
    }

    Descriptor const& descriptor() const noexcept {
      return descriptor_;
    }

    // Spelling in the function mini-language, or empty when the function
    // cannot be written there (convolutions, orbit sums).
    std::string const& spec() const noexcept {
      return spec_;
    }

    bool window_only() const;

   private:
    Group      group_;
    Descriptor descriptor_;
    Rational   bound_;
    Oracle     oracle_;
    std::string spec_;
  };

  TestFunction constant_function(Group const& G, Rational const& value);
  TestFunction half_space(Group const& G, std::vector<std::int64_t> normal);
  TestFunction subgroup_indicator(Embedding const& embedding);
  TestFunction ball_indicator(Group const& G, std::span<Element const> S, std::size_t radius);
  TestFunction semigroup_indicator(Group const& G, Element const& a, Element const& b);
  TestFunction custom_function(Group const& G,
                               std::string const& name,
                               TestFunction::Oracle oracle,
                               Rational const& bound);

  // Named predicates for `custom:<name>`.  A fresh registry holds the
  // built-ins "a-prefix" (free groups: reduced word starts with the first
  // generator) and "even" (lattices: coordinate sum is even).
  class PredicateRegistry {
   public:
    struct Entry {
      std::function<bool(Group const&)>                     applies;
      std::function<Rational(Group const&, Element const&)> value;
      Rational                                              bound;
    };

    PredicateRegistry();

    void add(std::string const& name, Entry entry);
    // Indicator of a finite set of elements of `G`, scaled by `value`.
    void add_finite_support(std::string const& name,
                            Group const& G,
                            std::vector<Element> const& support,
                            Rational const& value);

    TestFunction make(Group const& G, std::string const& name) const;

   private:
    std::map<std::string, Entry> entries_;
  };

  // Parses const:<q>, half:<group>:<normal>, ball:<R>, subgroup:<embedding>,
  // semigroup:<a>,<b>, custom:<name> and zext:<embedding>:<inner spec>.
  TestFunction parse_test_function(Group const&             G,
                                   std::string_view         spec,
                                   PredicateRegistry const& registry = PredicateRegistry());

  // (g.u)(x) = u(g^-1 x).
  Weight translate(Element const& g, Weight const& u);
  // (g.f)(x) = f(g^-1 x).
  TestFunction translate(Element const& g, TestFunction const& f);

  // p = 1: sum |u(x)| f(x).  p > 1: sum |u(x)|^p f(x)^p, the p-th power of
  // the weighted l^p norm.
  Rational weighted_norm(Weight const& u, TestFunction const& f, unsigned p = 1);

  // (rho f)(x) = sum_y rho(y) f(y^-1 x) with y in H viewed inside G.  H is
  // rho's group; it must equal G or be a factor of the product G.
  TestFunction convolve(Weight const& rho, TestFunction const& f);

  // Sum of translate(r, v) over the list.
  Weight       orbit_sum(Weight const& v, std::span<Element const> elements);
  TestFunction orbit_sum(TestFunction const& f, std::span<Element const> elements);

  // f~(x) = f(h) if x is the image of h, else 0.
  TestFunction zero_extension(TestFunction const& f, Embedding const& embedding);

}  // namespace conelab
