#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "conelab/rational.hpp"

namespace conelab {

  class Element;

  // Normal forms.  Each is canonical once passed through the Element
  // constructor, which reduces words, sorts lamps and so on.

  struct LatticeForm {
    std::vector<std::int64_t> coords;
  };

  // Letters are +(i+1) for generator i and -(i+1) for its inverse.
  struct ReducedWordForm {
    std::vector<int> letters;
  };

  // (x, y, z) * (x', y', z') = (x + x', y + y', z + z' + x y').
  struct HeisenbergForm {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t z = 0;
  };

  // Lit lamps (strictly increasing) and cursor position.
  struct LamplighterForm {
    std::vector<std::int64_t> lamps;
    std::int64_t              cursor = 0;
  };

  // The affine map x -> base^exponent * x + shift of BS(1, base).
  struct AffineForm {
    std::int64_t exponent = 0;
    Rational     shift;
  };

  // The map x -> (reflect ? -x : x) + shift.
  struct DihedralForm {
    std::int64_t shift   = 0;
    bool         reflect = false;
  };

  // Row-major dim x dim matrix.
  struct MatrixForm {
    std::size_t           dim = 0;
    std::vector<Rational> entries;
  };

  struct PairForm {
    std::vector<Element> factors;  // exactly two
  };

  using NormalForm = std::variant<LatticeForm,
                                  ReducedWordForm,
                                  HeisenbergForm,
                                  LamplighterForm,
                                  AffineForm,
                                  DihedralForm,
                                  MatrixForm,
                                  PairForm>;

  // A group element in canonical form.  Two elements are equal exactly when
  // their canonical keys are byte-identical; the ordering used everywhere for
  // deterministic output is the lexicographic order of keys.
  class Element {
   public:
    explicit Element(NormalForm form);

    NormalForm const& form() const noexcept {
      return form_;
    }

    std::string const& key() const noexcept {
      return key_;
    }

    friend bool operator==(Element const& a, Element const& b) noexcept {
      return a.key_ == b.key_;
    }

    friend std::strong_ordering operator<=>(Element const& a,
                                            Element const& b) noexcept {
      return a.key_.compare(b.key_) <=> 0;
    }

   private:
    NormalForm  form_;
    std::string key_;
  };

  struct ElementHash {
    std::size_t operator()(Element const& e) const noexcept {
      return std::hash<std::string>{}(e.key());
    }
  };

  // One factor of a word: a named element raised to a nonzero power.
  struct Syllable {
    std::string  name;
    std::int64_t exponent;
  };

  using Word = std::vector<Syllable>;

  enum class GroupKind {
    integer_lattice,
    free_group,
    heisenberg,
    lamplighter,
    baumslag_solitar,
    infinite_dihedral,
    direct_product,
    matrix_group
  };

  namespace detail {
    class GroupImpl;
  }

  // Immutable handle to a finitely generated group with exact arithmetic.
  // Copies share the implementation and are safe to use from many threads.
  class Group {
   public:
    static Group integer_lattice(std::size_t dimension);
    static Group free_group(std::size_t rank);
    static Group heisenberg();
    static Group lamplighter();
    static Group baumslag_solitar(std::int64_t m);
    static Group infinite_dihedral();
    static Group direct_product(Group const& left, Group const& right);
    // Each generator is a list of rows.  Throws PreconditionError if a
    // generator is not square, dimensions disagree, or one is singular.
    static Group matrix_group(
        std::vector<std::vector<std::vector<Rational>>> const& generators);

    GroupKind          kind() const;
    std::string const& spec() const;

    // Lattice dimension, free rank, BS base, matrix size; 0 otherwise.
    std::int64_t parameter() const;

    Element identity() const;
    Element multiply(Element const& a, Element const& b) const;
    Element inverse(Element const& a) const;
    Element power(Element const& a, std::int64_t k) const;

    // True if `a` has the shape of an element of this group.
    bool owns(Element const& a) const;

    // Symmetrised default generating set: each generator followed by its
    // inverse (omitted for involutions).
    std::vector<Element> const& generators() const;

    // Names usable in element literals, generators first.
    std::vector<std::pair<std::string, Element>> const& named_elements() const;

    Group const& factor(std::size_t index) const;
    Element      pair(Element const& left, Element const& right) const;

    Element              parse_element(std::string_view text) const;
    std::vector<Element> parse_elements(std::string_view comma_list) const;

    // A word in the named elements evaluating to `a`.  For matrix groups this
    // is found by breadth-first search and throws CapExceeded if `a` is not
    // reached within the default cap.
    Word        word_of(Element const& a) const;
    std::string format(Element const& a) const;

    friend bool operator==(Group const& a, Group const& b) {
      return a.spec() == b.spec();
    }

   private:
    explicit Group(std::shared_ptr<detail::GroupImpl const> impl);
    std::shared_ptr<detail::GroupImpl const> impl_;
  };

  // Parses the group mini-language: Z, Z^d, F<k>, H3, LL, BS1_<m>, Dinf,
  // prod(<spec>,<spec>) and mat:[[..],..],[[..],..].  Throws ParseError.
  Group make_group(std::string_view spec);

  std::string format_word(Word const& word);

}  // namespace conelab
