#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/polynomial.hpp"
#include "ruelle/roots.hpp"

namespace ruelle {

/// Value of the map and its first two derivatives at a finite point. When
/// `pole` is set the point maps to infinity and the derivative fields are
/// not meaningful.
struct MapJet {
    Cx value{};
    Cx d1{};
    Cx d2{};
    bool pole = false;
    int local_degree = 1;
};

struct CriticalPoint {
    Cx point{};
    int multiplicity = 1;
    bool simple = true;
    Cx value{};                  // R(c)
    bool value_infinite = false;
    Cx residue{};                // 1/R''(c) for simple c with finite value
};

struct FixedPoint {
    SpherePoint point;
    Cx multiplier{};
    bool superattracting = false;
};

/// Flags describing how an orbit terminated.
enum class OrbitFlag { none, escaped, converged_to_cycle, budget_exhausted };

struct OrbitRecord {
    Cx start{};
    std::vector<Cx> points;               // R^0(z0) .. R^n(z0)
    std::vector<Cx> derivative_products;  // (R^j)'(z0), chain rule
    OrbitFlag flag = OrbitFlag::none;
    int cycle_start = -1;
    int cycle_period = 0;
    bool product_overflow = false;  // products frozen past this point
};

/// A rational map R = P/Q in lowest terms, degree >= 2, with its critical
/// data (critical points c_i, values d_i = R(c_i), residues b_i = 1/R''(c_i)
/// of 1/R', and the multiplier omega = 1/R'(inf) when infinity is fixed)
/// computed eagerly at construction.
class RationalMap {
public:
    RationalMap(Polynomial num, Polynomial den, const Config& cfg)
        : num_(num.trimmed(cfg.tau_trim)), den_(den.trimmed(cfg.tau_trim)) {
        if (num_.is_zero() || den_.is_zero())
            throw Error(errc::malformed_map, "numerator or denominator is zero");
        degree_ = std::max(num_.degree(), den_.degree());
        if (degree_ < 2) throw Error(errc::malformed_map, "map degree must be >= 2");
        check_lowest_terms(cfg);
        compute_critical_data(cfg);
    }

    static RationalMap from_polynomial(Polynomial p, const Config& cfg) {
        return RationalMap(std::move(p), Polynomial::constant(Cx{1.0}), cfg);
    }

    int degree() const { return degree_; }
    const Polynomial& numerator() const { return num_; }
    const Polynomial& denominator() const { return den_; }
    bool is_polynomial() const { return den_.degree() == 0; }
    bool fixes_infinity() const { return num_.degree() > den_.degree(); }

    const std::vector<CriticalPoint>& critical_points() const { return critical_; }
    bool all_critical_simple() const { return all_simple_; }

    /// 1/R'(inf); the multiplier of the fixed point at infinity. Zero for
    /// polynomials of degree >= 2. Only meaningful when infinity is fixed.
    Cx omega() const { return omega_; }

    MapJet eval(Cx z, int derivative_order = 2) const {
        if (derivative_order < 0 || derivative_order > 2)
            throw Error(errc::bad_input, "derivative order must be 0..2");
        auto pj = num_.eval_jet(z);
        auto qj = den_.eval_jet(z);
        MapJet out;
        double qscale = den_.eval_scale(z);
        if (std::abs(qj.f) <= 1e-14 * qscale) {
            out.pole = true;
            // local degree = multiplicity of z as a zero of Q
            out.local_degree = (std::abs(qj.f1) <= 1e-14 * qscale) ? 2 : 1;
            return out;
        }
        out.value = pj.f / qj.f;
        if (derivative_order >= 1) {
            Cx w = pj.f1 * qj.f - pj.f * qj.f1;  // Wronskian P'Q - PQ'
            out.d1 = w / (qj.f * qj.f);
            if (derivative_order >= 2) {
                Cx w1 = pj.f2 * qj.f - pj.f * qj.f2;
                out.d2 = (w1 * qj.f - 2.0 * w * qj.f1) / (qj.f * qj.f * qj.f);
            }
        }
        return out;
    }

    /// R(inf) by degree comparison / leading coefficients.
    SpherePoint eval_at_infinity() const {
        if (num_.degree() > den_.degree()) return SpherePoint::at_infinity();
        if (num_.degree() < den_.degree()) return SpherePoint::finite(Cx{});
        return SpherePoint::finite(num_.leading() / den_.leading());
    }

    SpherePoint apply(const SpherePoint& z) const {
        if (z.infinite) return eval_at_infinity();
        MapJet j = eval(z.value, 0);
        return j.pole ? SpherePoint::at_infinity() : SpherePoint::finite(j.value);
    }

    /// All fixed points with multipliers: finite roots of P - z Q, plus
    /// infinity when the numerator degree dominates.
    std::vector<FixedPoint> fixed_points(const Config& cfg) const {
        Polynomial f = (num_ - Polynomial::identity() * den_).trimmed(cfg.tau_trim);
        std::vector<FixedPoint> out;
        if (!f.is_zero() && f.degree() >= 1) {
            for (const auto& cl : find_roots(f, cfg)) {
                MapJet j = eval(cl.point, 1);
                FixedPoint fp;
                fp.point = SpherePoint::finite(cl.point);
                fp.multiplier = j.pole ? Cx{} : j.d1;
                fp.superattracting = !j.pole && std::abs(j.d1) <= cfg.tau_cluster;
                out.push_back(fp);
            }
        }
        if (fixes_infinity()) {
            FixedPoint fp;
            fp.point = SpherePoint::at_infinity();
            fp.multiplier = omega_;
            fp.superattracting = num_.degree() >= den_.degree() + 2;
            out.push_back(fp);
        }
        return out;
    }

    /// Fixes 0, 1 and infinity (the standing normalization for the span and
    /// measure machinery).
    bool is_normalized(const Config& cfg) const {
        if (!fixes_infinity()) return false;
        MapJet a = eval(Cx{0.0}, 0), b = eval(Cx{1.0}, 0);
        if (a.pole || b.pole) return false;
        return std::abs(a.value) <= cfg.tau_comp && std::abs(b.value - 1.0) <= cfg.tau_comp;
    }

    void require_normalized(const Config& cfg) const {
        if (!is_normalized(cfg))
            throw Error(errc::not_normalized, "map must fix 0, 1 and infinity");
    }

    void require_simple_critical() const {
        if (!all_simple_)
            throw Error(errc::non_simple_critical, "map has a non-simple critical point");
    }

private:
    void check_lowest_terms(const Config& cfg) {
        if (den_.degree() < 1) return;
        for (const auto& cl : find_roots(den_, cfg)) {
            Cx nv = num_.eval(cl.point);
            if (std::abs(nv) <= cfg.tau_root * num_.eval_scale(cl.point) * 1e3)
                throw Error(errc::malformed_map, "numerator and denominator share a root");
        }
    }

    void compute_critical_data(const Config& cfg) {
        Polynomial w = (num_.derivative() * den_ - num_ * den_.derivative()).trimmed(cfg.tau_trim);
        all_simple_ = true;
        if (!w.is_zero() && w.degree() >= 1) {
            for (const auto& cl : find_roots(w, cfg)) {
                CriticalPoint cp;
                cp.point = cl.point;
                cp.multiplicity = cl.multiplicity;
                cp.simple = cl.multiplicity == 1;
                MapJet j = eval(cl.point, 2);
                if (j.pole) {
                    cp.value_infinite = true;
                    cp.residue = Cx{};  // 1/R' is regular at a multiple pole
                } else {
                    cp.value = j.value;
                    cp.residue = cp.simple ? 1.0 / j.d2 : Cx{};
                }
                if (!cp.simple) all_simple_ = false;
                critical_.push_back(cp);
            }
            std::sort(critical_.begin(), critical_.end(),
                      [](const CriticalPoint& a, const CriticalPoint& b) {
                          return lex_less(a.point, b.point);
                      });
        }
        if (num_.degree() >= den_.degree() + 2)
            omega_ = Cx{};
        else if (num_.degree() == den_.degree() + 1)
            omega_ = den_.leading() / num_.leading();
        else
            omega_ = Cx{};  // infinity not fixed; unused
    }

    Polynomial num_, den_;
    int degree_ = 0;
    std::vector<CriticalPoint> critical_;
    Cx omega_{};
    bool all_simple_ = true;
};

/// Forward orbit z0, R(z0), ..., with chain-rule derivative products
/// (R^j)'(z0). Cycle detection compares each new point against the whole
/// recorded orbit at the given tolerance.
inline OrbitRecord orbit(const RationalMap& map, Cx z0, int n, const Config& cfg,
                         double cycle_tolerance = 0.0) {
    if (n < 0 || static_cast<std::size_t>(n) > cfg.orbit_cap)
        throw Error(errc::budget, "orbit length exceeds budget");
    double ctol = cycle_tolerance > 0.0 ? cycle_tolerance : cfg.tau_cluster;

    OrbitRecord rec;
    rec.start = z0;
    rec.points.push_back(z0);
    rec.derivative_products.push_back(Cx{1.0});

    Cx z = z0;
    Cx prod{1.0};
    for (int j = 0; j < n; ++j) {
        MapJet jet = map.eval(z, 1);
        if (jet.pole || !is_finite(jet.value) || std::abs(jet.value) > kOverflowGuard) {
            rec.flag = OrbitFlag::escaped;
            return rec;
        }
        if (!rec.product_overflow) {
            Cx next_prod = prod * jet.d1;
            if (!is_finite(next_prod) || std::abs(next_prod) > kOverflowGuard * 1e100)
                rec.product_overflow = true;
            else
                prod = next_prod;
        }
        z = jet.value;
        rec.points.push_back(z);
        rec.derivative_products.push_back(rec.product_overflow ? Cx{} : prod);

        for (std::size_t k = 0; k + 1 < rec.points.size(); ++k) {
            if (close(rec.points[k], z, ctol)) {
                rec.flag = OrbitFlag::converged_to_cycle;
                rec.cycle_start = static_cast<int>(k);
                rec.cycle_period = static_cast<int>(rec.points.size() - 1 - k);
                return rec;
            }
        }
    }
    rec.flag = OrbitFlag::budget_exhausted;
    return rec;
}

/// Derivative products (R^j)'(z0) for j = 0..n without cycle detection or
/// early exit; entries after an overflow or pole are flagged invalid.
struct DerivativeLadder {
    std::vector<Cx> points;    // R^0(z0) .. R^n(z0)
    std::vector<Cx> products;  // (R^j)'(z0)
    std::vector<char> valid;
};

inline DerivativeLadder derivative_ladder(const RationalMap& map, Cx z0, int n) {
    DerivativeLadder lad;
    lad.points.push_back(z0);
    lad.products.push_back(Cx{1.0});
    lad.valid.push_back(1);
    Cx z = z0, prod{1.0};
    bool dead = false;
    for (int j = 0; j < n; ++j) {
        if (!dead) {
            MapJet jet = map.eval(z, 1);
            if (jet.pole || !is_finite(jet.value) || std::abs(jet.value) > kOverflowGuard) {
                dead = true;
            } else {
                prod *= jet.d1;
                z = jet.value;
                if (!is_finite(prod)) dead = true;
            }
        }
        lad.points.push_back(dead ? Cx{} : z);
        lad.products.push_back(dead ? Cx{} : prod);
        lad.valid.push_back(dead ? 0 : 1);
    }
    return lad;
}

}  // namespace ruelle
