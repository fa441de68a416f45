#include "conelab/constructions.hpp"

#include <algorithm>
#include <set>

#include "conelab/errors.hpp"

namespace conelab {

  Rational JenkinsSpec::resolved_base() const {
    if (epsilon <= 0) {
      throw PreconditionError("Jenkins weight needs epsilon > 0");
    }
    if (radius < 1) {
      throw PreconditionError("Jenkins weight needs truncation radius >= 1");
    }
    Rational r = base ? *base : Rational(1 / (1 + epsilon));
    if (r <= 0 || r > 1) {
      throw PreconditionError("Jenkins base must lie in (0, 1]");
    }
    if (1 / r - 1 > epsilon || 1 - r > epsilon) {
      throw PreconditionError("Jenkins base " + to_pq(r) + " violates max(1/r - 1, 1 - r) <= eps");
    }
    return r;
  }

  JenkinsResult jenkins_weight(JenkinsSpec const& spec, std::size_t cap) {
    auto const& G    = spec.group;
    Rational    r    = spec.resolved_base();
    auto const  B    = ball(G, spec.S, spec.radius, cap);
    auto const& gens = B.generating_set;

    std::vector<Rational> powers{Rational(1)};
    for (std::size_t k = 1; k <= spec.radius; ++k) {
      powers.push_back(powers.back() * r);
    }
    JenkinsResult out{Weight(G), r, {}, {}};
    for (std::size_t k = 0; k < B.layers.size(); ++k) {
      for (auto const& g : B.layers[k]) {
        out.rho.set(g, powers[k]);
      }
    }

    // Pointwise near-invariance on B_{N-1}, both sides.
    auto&       pw      = out.pointwise;
    pw.level            = VerificationLevel::global;
    Rational    worst   = 0;
    std::size_t checked = 0;
    for (std::size_t k = 0; k + 1 < B.layers.size(); ++k) {
      for (auto const& g : B.layers[k]) {
        Rational const rg = out.rho.value_at(g);
        for (auto const& s : gens) {
          for (auto const& h : {G.multiply(G.inverse(s), g), G.multiply(g, s)}) {
            Rational dev = abs_value(out.rho.value_at(h) - rg);
            ++checked;
            worst = std::max(worst, Rational(dev / rg));
            if (dev > spec.epsilon * rg) {
              pw.failures.push_back("pointwise bound fails at " + G.format(g) + " for " + G.format(s));
            }
          }
        }
      }
    }
    pw.quantities.emplace_back("checked", Rational(static_cast<unsigned long>(checked)));
    pw.quantities.emplace_back("worst_relative_change", worst);
    pw.passed = pw.failures.empty();

    ReiterWitness w{constant_function(G, 1), gens, spec.epsilon, out.rho, 1, {"jenkins_weight"}};
    out.reiter = verify_certificate(w);
    return out;
  }

  TildeCoefficients tilde_coefficients(std::vector<Rational> const& t, Rational const& epsilon) {
    if (epsilon <= 0 || epsilon >= 1) {
      throw PreconditionError("tilde coefficients need 0 < eps < 1");
    }
    TildeCoefficients out;
    Rational          sum = 0;
    for (auto const& v : t) {
      out.values.push_back(v > 0 ? Rational((1 + epsilon) * v) : Rational((1 - epsilon) * v));
      out.sum += out.values.back();
      sum += v;
    }
    out.preserves_violation = sum < 0 && out.sum < 0;
    return out;
  }

  SmoothingReport product_smoothing_check(Weight const&               rho,
                                          std::vector<Element> const& S,
                                          TestFunction const&         f,
                                          std::vector<Element> const& h_list,
                                          Rational const&             epsilon,
                                          BallTable const&            window) {
    auto const& P = f.group();
    auto const& H = rho.group();
    if (P.kind() != GroupKind::direct_product || !(P.factor(1) == H)) {
      throw PreconditionError(P.spec() + " is not a direct product with right factor " + H.spec());
    }
    std::set<std::string> allowed{H.identity().key()};
    for (auto const& s : symmetrize(H, S)) {
      allowed.insert(s.key());
    }
    for (auto const& h : h_list) {
      if (!allowed.count(h.key())) {
        throw PreconditionError("smoothing element " + H.format(h) + " is not in S");
      }
    }
    auto const      rho_f = convolve(rho, f);
    SmoothingReport out;
    for (auto const& h : h_list) {
      Weight shifted(H);
      for (auto const& [y, v] : rho.entries()) {
        shifted.set(H.multiply(y, h), v);
      }
      auto const left  = convolve(shifted, f);
      auto const right = convolve(rho, translate(P.pair(P.factor(0).identity(), h), f));
      for (auto const& x : window.elements()) {
        ++out.checked;
        Rational base = rho_f(x);
        Rational v    = left(x);
        auto     tag  = " for h = " + H.format(h);
        if (v < (1 - epsilon) * base) {
          out.failures.push_back({x, "lower sandwich bound" + tag});
        }
        if (v > (1 + epsilon) * base) {
          out.failures.push_back({x, "upper sandwich bound" + tag});
        }
        if (v != right(x)) {
          out.failures.push_back({x, "(rho h) f differs from rho (h f)" + tag});
        }
      }
    }
    out.passed = out.failures.empty();
    return out;
  }

  namespace {

    Weight push_forward(Weight const& u, Embedding const& e) {
      Weight out(e.target());
      for (auto const& [x, v] : u.entries()) {
        out.set(e.map(x), v);
      }
      return out;
    }

    std::vector<Element> push_forward(std::vector<Element> const& xs, Embedding const& e) {
      std::vector<Element> out;
      for (auto const& x : xs) {
        out.push_back(e.map(x));
      }
      return out;
    }

    std::vector<std::string> extend(std::vector<std::string> chain, Embedding const& e) {
      chain.push_back("transport_subgroup:" + e.spec());
      return chain;
    }

  }  // namespace

  Certificate transport_subgroup(Certificate const& c, Embedding const& embedding) {
    if (!(certificate_group(c) == embedding.source())) {
      throw GroupMismatch("certificate lives on " + certificate_group(c).spec() +
                          ", embedding starts at " + embedding.source().spec());
    }
    if (embedding.kind() == Embedding::Kind::identity) {
      return c;
    }
    return std::visit(
        [&](auto const& x) -> Certificate {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TranslateViolation>) {
            TranslateViolation v{zero_extension(x.f, embedding), {}, x.window_radius, x.level,
                                 extend(x.provenance, embedding)};
            for (auto const& [t, g] : x.items) {
              v.items.emplace_back(t, embedding.map(g));
            }
            return v;
          } else if constexpr (std::is_same_v<T, RatioWitness>) {
            return RatioWitness{zero_extension(x.f, embedding), push_forward(x.test_set, embedding),
                                x.epsilon, push_forward(x.u, embedding), x.two_sided, x.p,
                                extend(x.provenance, embedding)};
          } else if constexpr (std::is_same_v<T, ReiterWitness>) {
            return ReiterWitness{zero_extension(x.f, embedding), push_forward(x.test_set, embedding),
                                 x.epsilon, push_forward(x.u, embedding), x.p,
                                 extend(x.provenance, embedding)};
          } else {
            // Word collisions and freeness survive any injective homomorphism.
            return FreenessWitness{embedding.target(), embedding.map(x.a), embedding.map(x.b),
                                   x.depth, x.free, x.collision};
          }
        },
        c);
  }

  namespace {

    void require_closed(Group const& G, std::vector<Element> const& elements) {
      std::set<Element> F(elements.begin(), elements.end());
      if (F.size() != elements.size()) {
        throw PreconditionError("normal average list has repeated elements");
      }
      for (auto const& r : elements) {
        for (auto const& g : elements) {
          if (!F.count(G.multiply(r, g))) {
            throw PreconditionError("invariance check fails: " + G.format(r) + " * " + G.format(g) +
                                    " leaves the list");
          }
        }
      }
    }

  }  // namespace

  Weight finite_transport(FiniteTransport kind, Weight const& v, std::vector<Element> const& elements) {
    auto out = orbit_sum(v, elements);
    if (kind == FiniteTransport::finite_normal_average) {
      require_closed(v.group(), elements);
      for (auto const& r : elements) {
        if (!(translate(r, out) == out)) {
          throw PreconditionError("invariance check fails under " + v.group().format(r));
        }
      }
    }
    return out;
  }

  TestFunction finite_transport(FiniteTransport kind, TestFunction const& f,
                                std::vector<Element> const& elements) {
    if (kind == FiniteTransport::finite_normal_average) {
      require_closed(f.group(), elements);
    }
    return orbit_sum(f, elements);
  }

}  // namespace conelab
