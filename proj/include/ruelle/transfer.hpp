#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/preimage.hpp"
#include "ruelle/rational_map.hpp"
#include "ruelle/span.hpp"

namespace ruelle {

/// Pointwise test function / density argument for the pointwise operators.
using Field = std::function<Cx(Cx)>;

inline Field constant_field(Cx v) {
    return [v](Cx) { return v; };
}

/// Weighted preimage sum sum_{R(y)=z} phi(y) / (R'(y)^n conj(R'(y))^m).
/// (n,m) = (2,0) is the transfer (pushforward) operator, (1,1) its modulus.
/// Returns a pole marker when z is a critical value (a branch derivative
/// vanishes and the weight blows up).
inline PointValue pushforward_point(const RationalMap& map, const Field& phi, int n, int m,
                                    Cx z, const Config& cfg) {
    PreimageTree tree(map, z, 1, cfg);
    CompensatedCxSum sum;
    for (const auto& node : tree.level(1)) {
        if (node.critical_collision) return {Cx{}, true};
        Cx w = phi(node.point);
        Cx dn{1.0};
        for (int k = 0; k < n; ++k) dn *= node.branch_deriv;
        Cx dm{1.0};
        Cx conj_d = std::conj(node.branch_deriv);
        for (int k = 0; k < m; ++k) dm *= conj_d;
        sum.add(double(node.multiplicity) * w / (dn * dm));
    }
    Cx v = sum.value();
    if (!is_finite(v)) return {Cx{}, true};
    return {v, false};
}

/// Right inverse of the pushforward after the degree division:
/// phi(R(z)) R'(z)^2 / deg(R).
inline PointValue pullback_point(const RationalMap& map, const Field& phi, Cx z) {
    MapJet jet = map.eval(z, 1);
    if (jet.pole) return {Cx{}, true};
    Cx v = phi(jet.value) * jet.d1 * jet.d1 / double(map.degree());
    if (!is_finite(v)) return {Cx{}, true};
    return {v, false};
}

/// L_p-weighted preimage sum d^{-(p-1)/p} sum phi(J_i) (J_i')^{2/p}, with
/// J_i' = 1/R'(y_i). Non-modulus mode uses the principal branch of the
/// fractional power; the arguments fed to that branch are reported so a
/// caller can see which terms crossed the cut.
struct LpResult {
    Cx value{};
    bool pole = false;
    std::vector<double> branch_args;  // arg(J_i'), node order
};

inline LpResult lp_pushforward(const RationalMap& map, const Field& phi, double p,
                               bool modulus, Cx z, const Config& cfg) {
    if (!(p > 1.0)) throw Error(errc::bad_input, "p must be > 1");
    PreimageTree tree(map, z, 1, cfg);
    LpResult out;
    CompensatedCxSum sum;
    const double expo = 2.0 / p;
    for (const auto& node : tree.level(1)) {
        if (node.critical_collision) {
            out.pole = true;
            return out;
        }
        Cx jprime = 1.0 / node.branch_deriv;
        Cx w;
        if (modulus) {
            w = std::pow(std::abs(jprime), expo);
        } else {
            out.branch_args.push_back(std::arg(jprime));
            w = std::pow(jprime, Cx{expo, 0.0});
        }
        sum.add(double(node.multiplicity) * phi(node.point) * w);
    }
    out.value = std::pow(double(map.degree()), -(p - 1.0) / p) * sum.value();
    if (!is_finite(out.value)) out.pole = true;
    return out;
}

/// Beltrami action mu(R(z)) conj(R'(z)) / R'(z); unimodular weight, so
/// |result| = |mu(R(z))|.
inline PointValue beltrami_point(const RationalMap& map, const Field& mu, Cx z) {
    MapJet jet = map.eval(z, 1);
    if (jet.pole) return {Cx{}, true};
    if (jet.d1 == Cx{}) return {Cx{}, true};  // critical point
    Cx v = mu(jet.value) * std::conj(jet.d1) / jet.d1;
    if (!is_finite(v)) return {Cx{}, true};
    return {v, false};
}

namespace detail {

/// h_i(c_i) = lim_{z->c_i} (1/R'(z) - b_i/(z - c_i)), evaluated through the
/// partial-fraction decomposition 1/R' = omega + sum_j b_j/(z - c_j).
inline Cx regular_part_at_critical(const RationalMap& map, std::size_t i) {
    const auto& cps = map.critical_points();
    Cx h = map.omega();
    for (std::size_t j = 0; j < cps.size(); ++j) {
        if (j == i) continue;
        h += cps[j].residue / (cps[i].point - cps[j].point);
    }
    return h;
}

inline bool lands_on_gamma_degenerate(const SpherePoint& w, const Config& cfg) {
    return w.infinite || close(w.value, Cx{0.0}, cfg.tau_cluster) ||
           close(w.value, Cx{1.0}, cfg.tau_cluster);
}

}  // namespace detail

/// Closed form of the pushforward on the gamma/tau span, for a normalized
/// map (0, 1, inf fixed) with simple critical points:
///
///   gamma_a  ->  gamma_{R(a)} / R'(a) + sum_i b_i gamma_a(c_i) gamma_{R(c_i)}
///   tau_a    ->  tau_{R(a)} / R'(a)  + sum_i b_i tau_a(c_i)  tau_{R(c_i)}
///
/// with the degenerate-pole variant when a coincides with a critical point:
/// the leading coefficient becomes h_i(c_i) + b_i (2c_i - 1)/(c_i(c_i - 1))
/// for gamma and h_i(c_i) for tau. Image poles landing on {0,1} drop the
/// gamma term (the kernel vanishes identically); a gamma image pole at
/// infinity is dropped, a tau image pole at infinity is an error.
inline SpanFunction span_pushforward(const RationalMap& map, const SpanFunction& f,
                                     const Config& cfg) {
    map.require_normalized(cfg);
    map.require_simple_critical();
    if (std::abs(f.constant_term()) > cfg.tau_drop * std::max(1.0, f.max_abs_coeff()))
        throw Error(errc::unsupported, "pushforward is defined on the pole span only");

    const auto& cps = map.critical_points();
    SpanFunction out;

    auto critical_index = [&](Cx a) -> int {
        for (std::size_t i = 0; i < cps.size(); ++i)
            if (close(a, cps[i].point, cfg.tau_cluster)) return static_cast<int>(i);
        return -1;
    };

    for (const auto& term : f.gamma_terms()) {
        const Cx a = term.pole;
        const Cx alpha = term.coeff;
        int ci = critical_index(a);
        if (ci < 0) {
            MapJet jet = map.eval(a, 1);
            if (jet.pole) throw Error(errc::pole, "gamma pole sits on a pole of the map");
            SpherePoint ra = SpherePoint::finite(jet.value);
            if (!detail::lands_on_gamma_degenerate(ra, cfg))
                out.add_gamma(jet.value, alpha / jet.d1, cfg);
            for (std::size_t i = 0; i < cps.size(); ++i) {
                SpherePoint di = cps[i].value_infinite ? SpherePoint::at_infinity()
                                                       : SpherePoint::finite(cps[i].value);
                if (detail::lands_on_gamma_degenerate(di, cfg)) continue;
                Cx w = cps[i].residue * gamma_kernel(a, cps[i].point);
                out.add_gamma(cps[i].value, alpha * w, cfg);
            }
        } else {
            const auto& cp = cps[static_cast<std::size_t>(ci)];
            SpherePoint dci = cp.value_infinite ? SpherePoint::at_infinity()
                                                : SpherePoint::finite(cp.value);
            if (!detail::lands_on_gamma_degenerate(dci, cfg)) {
                Cx c = cp.point;
                Cx lead = detail::regular_part_at_critical(map, std::size_t(ci)) +
                          cp.residue * (2.0 * c - 1.0) / (c * (c - 1.0));
                out.add_gamma(cp.value, alpha * lead, cfg);
            }
            for (std::size_t i = 0; i < cps.size(); ++i) {
                if (static_cast<int>(i) == ci) continue;
                SpherePoint di = cps[i].value_infinite ? SpherePoint::at_infinity()
                                                       : SpherePoint::finite(cps[i].value);
                if (detail::lands_on_gamma_degenerate(di, cfg)) continue;
                Cx w = cps[i].residue * gamma_kernel(a, cps[i].point);
                out.add_gamma(cps[i].value, alpha * w, cfg);
            }
        }
    }

    for (const auto& term : f.tau_terms()) {
        const Cx a = term.pole;
        const Cx beta = term.coeff;
        int ci = critical_index(a);
        if (ci < 0) {
            MapJet jet = map.eval(a, 1);
            if (jet.pole) throw Error(errc::pole, "tau pole maps to infinity");
            out.add_tau(jet.value, beta / jet.d1, cfg);
            for (const auto& cp : cps) {
                if (cp.value_infinite)
                    throw Error(errc::pole, "tau image pole at infinity");
                out.add_tau(cp.value, beta * cp.residue * tau_kernel(a, cp.point), cfg);
            }
        } else {
            const auto& cp = cps[static_cast<std::size_t>(ci)];
            if (cp.value_infinite) throw Error(errc::pole, "tau image pole at infinity");
            out.add_tau(cp.value, beta * detail::regular_part_at_critical(map, std::size_t(ci)),
                        cfg);
            for (std::size_t i = 0; i < cps.size(); ++i) {
                if (static_cast<int>(i) == ci) continue;
                if (cps[i].value_infinite)
                    throw Error(errc::pole, "tau image pole at infinity");
                out.add_tau(cps[i].value, beta * cps[i].residue * tau_kernel(a, cps[i].point),
                            cfg);
            }
        }
    }

    out.finalize(cfg);
    return out;
}

/// Cesaro average (1/N) sum_{i=0}^{N-1} (R^*)^i f on the span. Truncation
/// happens when the iterated span outgrows the configured cap; the average
/// of the completed iterates is returned with the flag set.
struct CesaroResult {
    SpanFunction average;
    int completed = 0;
    bool truncated = false;
};

inline CesaroResult cesaro(const RationalMap& map, const SpanFunction& f, int n,
                           const Config& cfg) {
    if (n < 1) throw Error(errc::bad_input, "Cesaro average needs N >= 1");
    CesaroResult res;
    SpanFunction acc = f;
    SpanFunction g = f;
    res.completed = 1;
    for (int i = 1; i < n; ++i) {
        g = span_pushforward(map, g, cfg);
        if (g.size() > cfg.span_cap) {
            res.truncated = true;
            break;
        }
        acc.axpy(Cx{1.0}, g, cfg);
        acc.finalize(cfg);
        ++res.completed;
    }
    acc.scale(Cx{1.0 / double(res.completed)});
    res.average = std::move(acc);
    return res;
}

/// Dual action on potentials: T(phi)(a) = phi(R(a))/R'(a)
/// - sum_i b_i phi(R(c_i)) / (a - c_i).
inline PointValue dual_transfer_T(const RationalMap& map, const Field& phi, Cx a,
                                  const Config& cfg) {
    for (const auto& cp : map.critical_points())
        if (close(a, cp.point, cfg.tau_cluster)) return {Cx{}, true};
    MapJet jet = map.eval(a, 1);
    if (jet.pole) return {Cx{}, true};
    CompensatedCxSum s;
    s.add(phi(jet.value) / jet.d1);
    for (const auto& cp : map.critical_points()) {
        if (cp.value_infinite) return {Cx{}, true};
        s.add(-cp.residue * phi(cp.value) / (a - cp.point));
    }
    Cx v = s.value();
    if (!is_finite(v)) return {Cx{}, true};
    return {v, false};
}

}  // namespace ruelle
