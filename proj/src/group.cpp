#include "conelab/group.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

#include "conelab/ball.hpp"
#include "conelab/errors.hpp"

namespace conelab {

  ////////////////////////////////////////////////////////////////////////
  // Canonical forms and keys
  ////////////////////////////////////////////////////////////////////////

  namespace {

    void canonicalize(LatticeForm&) {}

    void canonicalize(ReducedWordForm& w) {
      std::vector<int> out;
      out.reserve(w.letters.size());
      for (int letter : w.letters) {
        if (!out.empty() && out.back() == -letter) {
          out.pop_back();
        } else {
          out.push_back(letter);
        }
      }
      w.letters = std::move(out);
    }

    void canonicalize(HeisenbergForm&) {}

    void canonicalize(LamplighterForm& l) {
      // A lamp listed twice is toggled twice.
      std::sort(l.lamps.begin(), l.lamps.end());
      std::vector<std::int64_t> out;
      for (auto p : l.lamps) {
        if (!out.empty() && out.back() == p) {
          out.pop_back();
        } else {
          out.push_back(p);
        }
      }
      l.lamps = std::move(out);
    }

    void canonicalize(AffineForm& a) {
      a.shift.canonicalize();
    }

    void canonicalize(DihedralForm&) {}

    void canonicalize(MatrixForm& m) {
      for (auto& q : m.entries) {
        q.canonicalize();
      }
    }

    void canonicalize(PairForm&) {}

    template <typename T>
    void join(std::ostringstream& os, std::vector<T> const& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
          os << ',';
        }
        os << v[i];
      }
    }

    std::string key_of(NormalForm const& form) {
      std::ostringstream os;
      std::visit(
          [&os](auto const& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, LatticeForm>) {
              os << "Z(";
              join(os, f.coords);
              os << ')';
            } else if constexpr (std::is_same_v<T, ReducedWordForm>) {
              os << "F(";
              join(os, f.letters);
              os << ')';
            } else if constexpr (std::is_same_v<T, HeisenbergForm>) {
              os << "H(" << f.x << ',' << f.y << ',' << f.z << ')';
            } else if constexpr (std::is_same_v<T, LamplighterForm>) {
              os << "L{";
              join(os, f.lamps);
              os << "}@" << f.cursor;
            } else if constexpr (std::is_same_v<T, AffineForm>) {
              os << "B(" << f.exponent << ',' << to_pq(f.shift) << ')';
            } else if constexpr (std::is_same_v<T, DihedralForm>) {
              os << "D(" << f.shift << ',' << (f.reflect ? 1 : 0) << ')';
            } else if constexpr (std::is_same_v<T, MatrixForm>) {
              os << "M[";
              for (std::size_t i = 0; i < f.entries.size(); ++i) {
                if (i > 0) {
                  os << (i % f.dim == 0 ? ';' : ',');
                }
                os << to_pq(f.entries[i]);
              }
              os << ']';
            } else {
              os << "P<" << f.factors.at(0).key() << '|' << f.factors.at(1).key()
                 << '>';
            }
          },
          form);
      return os.str();
    }

  }  // namespace

  Element::Element(NormalForm form) : form_(std::move(form)) {
    std::visit([](auto& f) { canonicalize(f); }, form_);
    key_ = key_of(form_);
  }

  std::string format_word(Word const& word) {
    if (word.empty()) {
      return "e";
    }
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (i > 0) {
        out += '*';
      }
      out += word[i].name;
      if (word[i].exponent != 1) {
        out += '^' + std::to_string(word[i].exponent);
      }
    }
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // Implementations
  ////////////////////////////////////////////////////////////////////////

  namespace detail {

    class GroupImpl {
     public:
      virtual ~GroupImpl() = default;

      virtual GroupKind kind() const                                    = 0;
      virtual bool      owns(Element const& a) const                    = 0;
      virtual Element   identity() const                                = 0;
      virtual Element   multiply(Element const& a, Element const& b) const = 0;
      virtual Element   inverse(Element const& a) const                 = 0;
      // Empty optional: no closed-form word, caller falls back to search.
      virtual std::optional<Word> word_of(Element const& a) const = 0;

      virtual Group const& factor(std::size_t) const {
        throw UnsupportedError("group " + spec + " is not a direct product");
      }

      std::string                                  spec;
      std::int64_t                                 parameter = 0;
      std::vector<std::pair<std::string, Element>> names;
      std::vector<Element>                         generators;

     protected:
      // Records the named generators and builds the symmetrised set.
      void set_generators(std::vector<std::pair<std::string, Element>> named) {
        names = std::move(named);
        generators.clear();
        for (auto const& [name, g] : names) {
          generators.push_back(g);
          Element inv = inverse(g);
          if (!(inv == g)) {
            generators.push_back(inv);
          }
        }
      }
    };

  }  // namespace detail

  namespace {

    using detail::GroupImpl;

    void push_syllable(Word& w, std::string const& name, std::int64_t e) {
      if (e == 0) {
        return;
      }
      if (!w.empty() && w.back().name == name) {
        w.back().exponent += e;
        if (w.back().exponent == 0) {
          w.pop_back();
        }
      } else {
        w.push_back({name, e});
      }
    }

    template <typename F>
    F const& as(Element const& a) {
      return std::get<F>(a.form());
    }

    class LatticeGroup final : public GroupImpl {
     public:
      explicit LatticeGroup(std::size_t d) : d_(d) {
        if (d == 0) {
          throw PreconditionError("Z^d requires d >= 1");
        }
        spec      = d == 1 ? "Z" : "Z^" + std::to_string(d);
        parameter = static_cast<std::int64_t>(d);
        std::vector<std::pair<std::string, Element>> named;
        for (std::size_t i = 0; i < d; ++i) {
          std::vector<std::int64_t> c(d, 0);
          c[i] = 1;
          named.emplace_back(axis_name(i), Element(LatticeForm{c}));
        }
        set_generators(std::move(named));
      }

      GroupKind kind() const override {
        return GroupKind::integer_lattice;
      }

      bool owns(Element const& a) const override {
        auto const* f = std::get_if<LatticeForm>(&a.form());
        return f != nullptr && f->coords.size() == d_;
      }

      Element identity() const override {
        return Element(LatticeForm{std::vector<std::int64_t>(d_, 0)});
      }

      Element multiply(Element const& a, Element const& b) const override {
        auto c = as<LatticeForm>(a).coords;
        auto const& o = as<LatticeForm>(b).coords;
        for (std::size_t i = 0; i < d_; ++i) {
          c[i] += o[i];
        }
        return Element(LatticeForm{std::move(c)});
      }

      Element inverse(Element const& a) const override {
        auto c = as<LatticeForm>(a).coords;
        for (auto& v : c) {
          v = -v;
        }
        return Element(LatticeForm{std::move(c)});
      }

      std::optional<Word> word_of(Element const& a) const override {
        Word w;
        auto const& c = as<LatticeForm>(a).coords;
        for (std::size_t i = 0; i < d_; ++i) {
          push_syllable(w, names[i].first, c[i]);
        }
        return w;
      }

     private:
      std::string axis_name(std::size_t i) const {
        if (d_ <= 3) {
          return std::string(1, "xyz"[i]);
        }
        return "e" + std::to_string(i + 1);
      }

      std::size_t d_;
    };

    class FreeGroup final : public GroupImpl {
     public:
      explicit FreeGroup(std::size_t k) : k_(k) {
        if (k == 0 || k > 25) {
          throw PreconditionError("F<k> requires 1 <= k <= 25");
        }
        spec      = "F" + std::to_string(k);
        parameter = static_cast<std::int64_t>(k);
        std::vector<std::pair<std::string, Element>> named;
        // 'e' is reserved for the identity in element literals.
        std::string letters = "abcdfghijklmnopqrstuvwxyz";
        for (std::size_t i = 0; i < k; ++i) {
          named.emplace_back(std::string(1, letters[i]),
                             Element(ReducedWordForm{{static_cast<int>(i) + 1}}));
        }
        set_generators(std::move(named));
      }

      GroupKind kind() const override {
        return GroupKind::free_group;
      }

      bool owns(Element const& a) const override {
        auto const* f = std::get_if<ReducedWordForm>(&a.form());
        if (f == nullptr) {
          return false;
        }
        auto k = static_cast<int>(k_);
        return std::all_of(f->letters.begin(), f->letters.end(), [k](int l) {
          return l != 0 && l >= -k && l <= k;
        });
      }

      Element identity() const override {
        return Element(ReducedWordForm{});
      }

      Element multiply(Element const& a, Element const& b) const override {
        auto w = as<ReducedWordForm>(a).letters;
        auto const& o = as<ReducedWordForm>(b).letters;
        w.insert(w.end(), o.begin(), o.end());
        return Element(ReducedWordForm{std::move(w)});
      }

      Element inverse(Element const& a) const override {
        auto w = as<ReducedWordForm>(a).letters;
        std::reverse(w.begin(), w.end());
        for (auto& l : w) {
          l = -l;
        }
        return Element(ReducedWordForm{std::move(w)});
      }

      std::optional<Word> word_of(Element const& a) const override {
        Word w;
        for (int l : as<ReducedWordForm>(a).letters) {
          push_syllable(w, names[std::abs(l) - 1].first, l > 0 ? 1 : -1);
        }
        return w;
      }

     private:
      std::size_t k_;
    };

    class HeisenbergGroup final : public GroupImpl {
     public:
      HeisenbergGroup() {
        spec = "H3";
        set_generators({{"x", Element(HeisenbergForm{1, 0, 0})},
                        {"y", Element(HeisenbergForm{0, 1, 0})}});
        // The central commutator x y x^-1 y^-1, usable in literals.
        names.emplace_back("z", Element(HeisenbergForm{0, 0, 1}));
      }

      GroupKind kind() const override {
        return GroupKind::heisenberg;
      }

      bool owns(Element const& a) const override {
        return std::holds_alternative<HeisenbergForm>(a.form());
      }

      Element identity() const override {
        return Element(HeisenbergForm{});
      }

      Element multiply(Element const& a, Element const& b) const override {
        auto const& p = as<HeisenbergForm>(a);
        auto const& q = as<HeisenbergForm>(b);
        return Element(HeisenbergForm{p.x + q.x, p.y + q.y, p.z + q.z + p.x * q.y});
      }

      Element inverse(Element const& a) const override {
        auto const& p = as<HeisenbergForm>(a);
        return Element(HeisenbergForm{-p.x, -p.y, -p.z + p.x * p.y});
      }

      std::optional<Word> word_of(Element const& a) const override {
        auto const& p = as<HeisenbergForm>(a);
        Word        w;
        push_syllable(w, "x", p.x);
        push_syllable(w, "y", p.y);
        push_syllable(w, "z", p.z - p.x * p.y);
        return w;
      }
    };

    class LamplighterGroup final : public GroupImpl {
     public:
      LamplighterGroup() {
        spec = "LL";
        set_generators({{"t", Element(LamplighterForm{{}, 1})},
                        {"a", Element(LamplighterForm{{0}, 0})}});
      }

      GroupKind kind() const override {
        return GroupKind::lamplighter;
      }

      bool owns(Element const& a) const override {
        return std::holds_alternative<LamplighterForm>(a.form());
      }

      Element identity() const override {
        return Element(LamplighterForm{});
      }

      // (L, m)(L', m') = (L xor (L' + m), m + m')
      Element multiply(Element const& a, Element const& b) const override {
        auto const& p     = as<LamplighterForm>(a);
        auto const& q     = as<LamplighterForm>(b);
        auto        lamps = p.lamps;
        for (auto x : q.lamps) {
          lamps.push_back(x + p.cursor);
        }
        return Element(LamplighterForm{std::move(lamps), p.cursor + q.cursor});
      }

      Element inverse(Element const& a) const override {
        auto const& p     = as<LamplighterForm>(a);
        auto        lamps = p.lamps;
        for (auto& x : lamps) {
          x -= p.cursor;
        }
        return Element(LamplighterForm{std::move(lamps), -p.cursor});
      }

      std::optional<Word> word_of(Element const& a) const override {
        auto const&  p = as<LamplighterForm>(a);
        Word         w;
        std::int64_t at = 0;
        for (auto x : p.lamps) {
          push_syllable(w, "t", x - at);
          push_syllable(w, "a", 1);
          at = x;
        }
        push_syllable(w, "t", p.cursor - at);
        return w;
      }
    };

    class BaumslagSolitarGroup final : public GroupImpl {
     public:
      explicit BaumslagSolitarGroup(std::int64_t m) : m_(m) {
        if (m < 2) {
          throw PreconditionError("BS(1,m) requires m >= 2");
        }
        spec      = "BS1_" + std::to_string(m);
        parameter = m;
        set_generators({{"a", Element(AffineForm{1, 0})},
                        {"b", Element(AffineForm{0, 1})}});
      }

      GroupKind kind() const override {
        return GroupKind::baumslag_solitar;
      }

      // The translation part must lie in Z[1/m].
      bool owns(Element const& a) const override {
        auto const* f = std::get_if<AffineForm>(&a.form());
        if (f == nullptr) {
          return false;
        }
        Integer den = f->shift.get_den();
        Integer m   = m_;
        Integer g;
        while (den != 1) {
          mpz_gcd(g.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t());
          if (g == 1) {
            return false;
          }
          den /= g;
        }
        return true;
      }

      Element identity() const override {
        return Element(AffineForm{0, 0});
      }

      // Composition: (a * b)(x) = a(b(x)).
      Element multiply(Element const& a, Element const& b) const override {
        auto const& p = as<AffineForm>(a);
        auto const& q = as<AffineForm>(b);
        return Element(AffineForm{p.exponent + q.exponent,
                                  p.shift + power(m_, p.exponent) * q.shift});
      }

      Element inverse(Element const& a) const override {
        auto const& p = as<AffineForm>(a);
        return Element(AffineForm{-p.exponent, -power(m_, -p.exponent) * p.shift});
      }

      // x -> m^k x + n / m^j  equals  a^-j b^n a^(j+k).
      std::optional<Word> word_of(Element const& a) const override {
        auto const&  p = as<AffineForm>(a);
        Word         w;
        std::int64_t j   = 0;
        Rational     num = p.shift;
        while (num.get_den() != 1) {
          num *= m_;
          ++j;
        }
        if (num == 0) {
          push_syllable(w, "a", p.exponent);
          return w;
        }
        if (!num.get_num().fits_slong_p()) {
          throw UnsupportedError("translation too large to write as a word");
        }
        push_syllable(w, "a", -j);
        push_syllable(w, "b", num.get_num().get_si());
        push_syllable(w, "a", j + p.exponent);
        return w;
      }

     private:
      std::int64_t m_;
    };

    class DihedralGroup final : public GroupImpl {
     public:
      DihedralGroup() {
        spec = "Dinf";
        set_generators({{"t", Element(DihedralForm{1, false})},
                        {"r", Element(DihedralForm{0, true})}});
      }

      GroupKind kind() const override {
        return GroupKind::infinite_dihedral;
      }

      bool owns(Element const& a) const override {
        return std::holds_alternative<DihedralForm>(a.form());
      }

      Element identity() const override {
        return Element(DihedralForm{});
      }

      Element multiply(Element const& a, Element const& b) const override {
        auto const& p = as<DihedralForm>(a);
        auto const& q = as<DihedralForm>(b);
        return Element(DihedralForm{p.shift + (p.reflect ? -q.shift : q.shift),
                                    p.reflect != q.reflect});
      }

      Element inverse(Element const& a) const override {
        auto const& p = as<DihedralForm>(a);
        return Element(DihedralForm{p.reflect ? p.shift : -p.shift, p.reflect});
      }

      std::optional<Word> word_of(Element const& a) const override {
        auto const& p = as<DihedralForm>(a);
        Word        w;
        push_syllable(w, "t", p.shift);
        push_syllable(w, "r", p.reflect ? 1 : 0);
        return w;
      }
    };

    class ProductGroup final : public GroupImpl {
     public:
      ProductGroup(Group left, Group right) : factors_{std::move(left), std::move(right)} {
        spec = "prod(" + factors_[0].spec() + "," + factors_[1].spec() + ")";
        std::vector<std::pair<std::string, Element>> named;
        std::vector<std::pair<std::string, Element>> extra;
        for (std::size_t side = 0; side < 2; ++side) {
          auto const& f    = factors_[side];
          auto const& fnam = f.named_elements();
          for (std::size_t i = 0; i < fnam.size(); ++i) {
            std::string name = fnam[i].first;
            if (side == 1 && rename_[0].count(name) > 0) {
              name += "_2";
            }
            rename_[side][fnam[i].first] = name;
            Element lifted = side == 0 ? pair(fnam[i].second, factors_[1].identity())
                                       : pair(factors_[0].identity(), fnam[i].second);
            bool is_generator = std::find(f.generators().begin(), f.generators().end(),
                                          fnam[i].second)
                                != f.generators().end();
            (is_generator ? named : extra).emplace_back(name, lifted);
          }
        }
        set_generators(std::move(named));
        names.insert(names.end(), extra.begin(), extra.end());
      }

      GroupKind kind() const override {
        return GroupKind::direct_product;
      }

      Group const& factor(std::size_t i) const override {
        if (i > 1) {
          throw PreconditionError("product factor index must be 0 or 1");
        }
        return factors_[i];
      }

      bool owns(Element const& a) const override {
        auto const* f = std::get_if<PairForm>(&a.form());
        return f != nullptr && f->factors.size() == 2
               && factors_[0].owns(f->factors[0]) && factors_[1].owns(f->factors[1]);
      }

      Element identity() const override {
        return pair(factors_[0].identity(), factors_[1].identity());
      }

      Element multiply(Element const& a, Element const& b) const override {
        auto const& p = as<PairForm>(a).factors;
        auto const& q = as<PairForm>(b).factors;
        return pair(factors_[0].multiply(p[0], q[0]), factors_[1].multiply(p[1], q[1]));
      }

      Element inverse(Element const& a) const override {
        auto const& p = as<PairForm>(a).factors;
        return pair(factors_[0].inverse(p[0]), factors_[1].inverse(p[1]));
      }

      std::optional<Word> word_of(Element const& a) const override {
        auto const& p = as<PairForm>(a).factors;
        Word        w;
        for (std::size_t side = 0; side < 2; ++side) {
          for (auto const& s : factors_[side].word_of(p[side])) {
            push_syllable(w, rename_[side].at(s.name), s.exponent);
          }
        }
        return w;
      }

      static Element pair(Element const& l, Element const& r) {
        return Element(PairForm{{l, r}});
      }

     private:
      Group                                        factors_[2];
      std::unordered_map<std::string, std::string> rename_[2];
    };

    using Matrix = std::vector<Rational>;

    Matrix mat_mul(Matrix const& a, Matrix const& b, std::size_t n) {
      Matrix c(n * n, Rational(0));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
          if (sgn(a[i * n + k]) == 0) {
            continue;
          }
          for (std::size_t j = 0; j < n; ++j) {
            c[i * n + j] += a[i * n + k] * b[k * n + j];
          }
        }
      }
      return c;
    }

    // Gauss-Jordan; empty result when singular.
    Matrix mat_inverse(Matrix a, std::size_t n) {
      Matrix inv(n * n, Rational(0));
      for (std::size_t i = 0; i < n; ++i) {
        inv[i * n + i] = 1;
      }
      for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && sgn(a[piv * n + col]) == 0) {
          ++piv;
        }
        if (piv == n) {
          return {};
        }
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(a[piv * n + j], a[col * n + j]);
          std::swap(inv[piv * n + j], inv[col * n + j]);
        }
        Rational p = a[col * n + col];
        for (std::size_t j = 0; j < n; ++j) {
          a[col * n + j] /= p;
          inv[col * n + j] /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
          if (i == col || sgn(a[i * n + col]) == 0) {
            continue;
          }
          Rational f = a[i * n + col];
          for (std::size_t j = 0; j < n; ++j) {
            a[i * n + j] -= f * a[col * n + j];
            inv[i * n + j] -= f * inv[col * n + j];
          }
        }
      }
      return inv;
    }

    std::string format_matrix(Matrix const& m, std::size_t n) {
      std::string out = "[";
      for (std::size_t i = 0; i < n; ++i) {
        out += i > 0 ? ",[" : "[";
        for (std::size_t j = 0; j < n; ++j) {
          if (j > 0) {
            out += ',';
          }
          out += m[i * n + j].get_str();
        }
        out += ']';
      }
      return out + "]";
    }

    class MatrixGroup final : public GroupImpl {
     public:
      explicit MatrixGroup(std::vector<std::vector<std::vector<Rational>>> const& gens) {
        if (gens.empty()) {
          throw PreconditionError("matrix group needs at least one generator");
        }
        n_ = gens[0].size();
        if (n_ == 0) {
          throw PreconditionError("matrix generators must be nonempty");
        }
        spec = "mat:";
        std::vector<std::pair<std::string, Element>> named;
        for (std::size_t g = 0; g < gens.size(); ++g) {
          if (gens[g].size() != n_) {
            throw PreconditionError("matrix generators must share one size");
          }
          Matrix m;
          for (auto const& row : gens[g]) {
            if (row.size() != n_) {
              throw PreconditionError("matrix generator " + std::to_string(g + 1)
                                      + " is not square");
            }
            m.insert(m.end(), row.begin(), row.end());
          }
          if (mat_inverse(m, n_).empty()) {
            throw PreconditionError("matrix generator " + std::to_string(g + 1)
                                    + " is singular");
          }
          spec += (g > 0 ? "," : "") + format_matrix(m, n_);
          named.emplace_back("g" + std::to_string(g + 1), Element(MatrixForm{n_, m}));
        }
        parameter = static_cast<std::int64_t>(n_);
        set_generators(std::move(named));
      }

      GroupKind kind() const override {
        return GroupKind::matrix_group;
      }

      bool owns(Element const& a) const override {
        auto const* f = std::get_if<MatrixForm>(&a.form());
        return f != nullptr && f->dim == n_ && f->entries.size() == n_ * n_;
      }

      Element identity() const override {
        Matrix m(n_ * n_, Rational(0));
        for (std::size_t i = 0; i < n_; ++i) {
          m[i * n_ + i] = 1;
        }
        return Element(MatrixForm{n_, std::move(m)});
      }

      Element multiply(Element const& a, Element const& b) const override {
        return Element(
            MatrixForm{n_, mat_mul(as<MatrixForm>(a).entries, as<MatrixForm>(b).entries, n_)});
      }

      Element inverse(Element const& a) const override {
        return Element(MatrixForm{n_, mat_inverse(as<MatrixForm>(a).entries, n_)});
      }

      std::optional<Word> word_of(Element const&) const override {
        return std::nullopt;
      }

     private:
      std::size_t n_ = 0;
    };

  }  // namespace

  ////////////////////////////////////////////////////////////////////////
  // Group
  ////////////////////////////////////////////////////////////////////////

  Group::Group(std::shared_ptr<detail::GroupImpl const> impl) : impl_(std::move(impl)) {}

  Group Group::integer_lattice(std::size_t d) {
    return Group(std::make_shared<LatticeGroup>(d));
  }
  Group Group::free_group(std::size_t k) {
    return Group(std::make_shared<FreeGroup>(k));
  }
  Group Group::heisenberg() {
    return Group(std::make_shared<HeisenbergGroup>());
  }
  Group Group::lamplighter() {
    return Group(std::make_shared<LamplighterGroup>());
  }
  Group Group::baumslag_solitar(std::int64_t m) {
    return Group(std::make_shared<BaumslagSolitarGroup>(m));
  }
  Group Group::infinite_dihedral() {
    return Group(std::make_shared<DihedralGroup>());
  }
  Group Group::direct_product(Group const& left, Group const& right) {
    return Group(std::make_shared<ProductGroup>(left, right));
  }
  Group Group::matrix_group(std::vector<std::vector<std::vector<Rational>>> const& gens) {
    return Group(std::make_shared<MatrixGroup>(gens));
  }

  GroupKind Group::kind() const {
    return impl_->kind();
  }
  std::string const& Group::spec() const {
    return impl_->spec;
  }
  std::int64_t Group::parameter() const {
    return impl_->parameter;
  }
  Element Group::identity() const {
    return impl_->identity();
  }

  bool Group::owns(Element const& a) const {
    return impl_->owns(a);
  }

  namespace {
    [[noreturn]] void mismatch(Group const& g, Element const& a) {
      throw GroupMismatch("element " + a.key() + " does not belong to " + g.spec());
    }
  }  // namespace

  Element Group::multiply(Element const& a, Element const& b) const {
    if (!impl_->owns(a)) {
      mismatch(*this, a);
    }
    if (!impl_->owns(b)) {
      mismatch(*this, b);
    }
    return impl_->multiply(a, b);
  }

  Element Group::inverse(Element const& a) const {
    if (!impl_->owns(a)) {
      mismatch(*this, a);
    }
    return impl_->inverse(a);
  }

  Element Group::power(Element const& a, std::int64_t k) const {
    Element base   = k >= 0 ? a : inverse(a);
    Element result = identity();
    auto    n      = k >= 0 ? static_cast<std::uint64_t>(k) : static_cast<std::uint64_t>(-k);
    while (n > 0) {
      if (n & 1U) {
        result = multiply(result, base);
      }
      n >>= 1U;
      if (n > 0) {
        base = multiply(base, base);
      }
    }
    return result;
  }

  std::vector<Element> const& Group::generators() const {
    return impl_->generators;
  }

  std::vector<std::pair<std::string, Element>> const& Group::named_elements() const {
    return impl_->names;
  }

  Group const& Group::factor(std::size_t index) const {
    return impl_->factor(index);
  }

  Element Group::pair(Element const& left, Element const& right) const {
    if (kind() != GroupKind::direct_product) {
      throw UnsupportedError("group " + spec() + " is not a direct product");
    }
    if (!factor(0).owns(left)) {
      mismatch(factor(0), left);
    }
    if (!factor(1).owns(right)) {
      mismatch(factor(1), right);
    }
    return Element(PairForm{{left, right}});
  }

  Word Group::word_of(Element const& a) const {
    if (!impl_->owns(a)) {
      mismatch(*this, a);
    }
    if (auto w = impl_->word_of(a)) {
      return *w;
    }
    // Breadth-first search over the named generators.
    std::size_t const cap = default_ball_cap();
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> parent;
    std::vector<Element> frontier{identity()};
    parent.emplace(identity().key(), std::make_pair(std::string(), std::size_t(0)));
    auto const& gens = generators();
    while (!frontier.empty() && parent.count(a.key()) == 0) {
      std::vector<Element> next;
      for (auto const& g : frontier) {
        for (std::size_t i = 0; i < gens.size(); ++i) {
          Element h = impl_->multiply(g, gens[i]);
          if (parent.emplace(h.key(), std::make_pair(g.key(), i)).second) {
            next.push_back(h);
            if (parent.size() > cap) {
              throw CapExceeded("no word found for " + a.key() + " within the ball cap");
            }
          }
        }
      }
      frontier = std::move(next);
    }
    if (parent.count(a.key()) == 0) {
      throw CapExceeded("no word found for " + a.key());
    }
    std::vector<std::size_t> letters;
    std::string              at = a.key();
    while (at != identity().key()) {
      auto const& [prev, gen] = parent.at(at);
      letters.push_back(gen);
      at = prev;
    }
    std::reverse(letters.begin(), letters.end());
    // Map symmetrised generators back to named generators and exponents.
    Word w;
    for (auto idx : letters) {
      for (auto const& [name, g] : impl_->names) {
        if (g == gens[idx]) {
          push_syllable(w, name, 1);
          break;
        }
        if (impl_->inverse(g) == gens[idx]) {
          push_syllable(w, name, -1);
          break;
        }
      }
    }
    return w;
  }

  std::string Group::format(Element const& a) const {
    return format_word(word_of(a));
  }

  ////////////////////////////////////////////////////////////////////////
  // Parsing
  ////////////////////////////////////////////////////////////////////////

  namespace {
    std::size_t skip_space(std::string_view s, std::size_t i) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
      }
      return i;
    }
  }  // namespace

  Element Group::parse_element(std::string_view text) const {
    Element     result = identity();
    std::size_t i      = skip_space(text, 0);
    if (i == text.size()) {
      throw ParseError("empty element literal", i);
    }
    while (true) {
      i                 = skip_space(text, i);
      std::size_t start = i;
      while (i < text.size()
             && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
        ++i;
      }
      if (i == start) {
        throw ParseError("expected a generator name", start);
      }
      std::string name(text.substr(start, i - start));
      Element     base = identity();
      if (name != "e" && name != "1") {
        auto const& names = named_elements();
        auto        it    = std::find_if(names.begin(), names.end(),
                                 [&name](auto const& p) { return p.first == name; });
        if (it == names.end()) {
          throw ParseError("unknown generator '" + name + "' for " + spec(), start);
        }
        base = it->second;
      }
      i                  = skip_space(text, i);
      std::int64_t expon = 1;
      if (i < text.size() && text[i] == '^') {
        i                = skip_space(text, i + 1);
        std::size_t estart = i;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
          ++i;
        }
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
          ++i;
        }
        try {
          expon = std::stoll(std::string(text.substr(estart, i - estart)));
        } catch (std::exception const&) {
          throw ParseError("expected an integer exponent", estart);
        }
        i = skip_space(text, i);
      }
      result = multiply(result, power(base, expon));
      if (i == text.size()) {
        break;
      }
      if (text[i] != '*') {
        throw ParseError("expected '*' between syllables", i);
      }
      ++i;
    }
    return result;
  }

  std::vector<Element> Group::parse_elements(std::string_view list) const {
    std::vector<Element> out;
    std::size_t          start = 0;
    while (start <= list.size()) {
      auto comma = list.find(',', start);
      auto end   = comma == std::string_view::npos ? list.size() : comma;
      try {
        out.push_back(parse_element(list.substr(start, end - start)));
      } catch (ParseError const& e) {
        throw ParseError(e.detail(), start + e.position());
      }
      if (comma == std::string_view::npos) {
        break;
      }
      start = comma + 1;
    }
    return out;
  }

  namespace {

    class SpecParser {
     public:
      explicit SpecParser(std::string_view text) : text_(text) {}

      Group parse_all() {
        Group g = parse();
        skip();
        if (pos_ != text_.size()) {
          throw ParseError("unexpected trailing input", pos_);
        }
        return g;
      }

     private:
      void skip() {
        pos_ = skip_space(text_, pos_);
      }

      bool consume(std::string_view token) {
        skip();
        if (text_.substr(pos_, token.size()) == token) {
          pos_ += token.size();
          return true;
        }
        return false;
      }

      void expect(char c) {
        skip();
        if (pos_ >= text_.size() || text_[pos_] != c) {
          throw ParseError(std::string("expected '") + c + "'", pos_);
        }
        ++pos_;
      }

      std::int64_t number() {
        skip();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          ++pos_;
        }
        if (start == pos_) {
          throw ParseError("expected a number", start);
        }
        return std::stoll(std::string(text_.substr(start, pos_ - start)));
      }

      Rational rational() {
        skip();
        std::size_t start = pos_;
        while (pos_ < text_.size()
               && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '/'
                   || text_[pos_] == '-' || text_[pos_] == '+')) {
          ++pos_;
        }
        try {
          return parse_rational(text_.substr(start, pos_ - start));
        } catch (ParseError const& e) {
          throw ParseError("bad matrix entry", start + e.position());
        }
      }

      template <typename F>
      auto bracketed_list(F item) {
        std::vector<decltype(item())> out;
        expect('[');
        do {
          out.push_back(item());
          skip();
        } while (consume(","));
        expect(']');
        return out;
      }

      Group parse() {
        skip();
        std::size_t start = pos_;
        try {
          if (consume("prod(")) {
            Group left = parse();
            expect(',');
            Group right = parse();
            expect(')');
            return Group::direct_product(left, right);
          }
          if (consume("mat:")) {
            std::vector<std::vector<std::vector<Rational>>> gens;
            do {
              gens.push_back(bracketed_list([this] {
                return bracketed_list([this] { return rational(); });
              }));
              // Another generator only if the next bracket follows.
              skip();
            } while (pos_ + 1 < text_.size() && text_[pos_] == ','
                     && skip_space(text_, pos_ + 1) < text_.size()
                     && text_[skip_space(text_, pos_ + 1)] == '[' && consume(","));
            return Group::matrix_group(gens);
          }
          if (consume("BS1_")) {
            return Group::baumslag_solitar(number());
          }
          if (consume("Dinf")) {
            return Group::infinite_dihedral();
          }
          if (consume("H3")) {
            return Group::heisenberg();
          }
          if (consume("LL")) {
            return Group::lamplighter();
          }
          if (consume("F")) {
            return Group::free_group(static_cast<std::size_t>(number()));
          }
          if (consume("Z")) {
            if (consume("^")) {
              return Group::integer_lattice(static_cast<std::size_t>(number()));
            }
            return Group::integer_lattice(1);
          }
        } catch (PreconditionError const& e) {
          throw ParseError(e.what(), start);
        }
        throw ParseError("expected a group (Z^d, F<k>, H3, LL, BS1_<m>, Dinf, prod, mat)",
                         start);
      }

      std::string_view text_;
      std::size_t      pos_ = 0;
    };

  }  // namespace

  Group make_group(std::string_view spec) {
    return SpecParser(spec).parse_all();
  }

}  // namespace conelab
