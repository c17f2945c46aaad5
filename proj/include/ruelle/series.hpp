#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/preimage.hpp"
#include "ruelle/rational_map.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

enum class TermFlag : unsigned char { ok, pole, not_computable };

/// Indexed partial sums of a complex series together with the prefix sums of
/// |term|. partials[n] - partials[n-1] == terms[n] holds exactly: prefix
/// accumulation is plain (term counts are small); heavy inner sums happen
/// upstream, compensated. A pole poisons its own index; every partial from
/// the first pole on is flagged not-computable.
struct SeriesLedger {
    std::string label;  // RP | RS | S | A | custom
    std::vector<Cx> terms;
    std::vector<Cx> partials;
    std::vector<double> abs_partials;
    std::vector<TermFlag> flags;
    bool truncated = false;
    std::string truncation_reason;

    void push(Cx term, TermFlag flag = TermFlag::ok) {
        bool poisoned = flag != TermFlag::ok ||
                        (!flags.empty() && flags.back() != TermFlag::ok);
        terms.push_back(term);
        if (poisoned) {
            partials.push_back(partials.empty() ? Cx{} : partials.back());
            abs_partials.push_back(abs_partials.empty() ? 0.0 : abs_partials.back());
            flags.push_back(flag == TermFlag::ok ? TermFlag::not_computable : flag);
        } else {
            partials.push_back((partials.empty() ? Cx{} : partials.back()) + term);
            abs_partials.push_back((abs_partials.empty() ? 0.0 : abs_partials.back()) +
                                   std::abs(term));
            flags.push_back(TermFlag::ok);
        }
    }

    std::size_t size() const { return terms.size(); }

    bool clean_through(std::size_t n) const {
        if (terms.size() <= n) return false;
        for (std::size_t i = 0; i <= n; ++i)
            if (flags[i] != TermFlag::ok) return false;
        return true;
    }
};

/// Forward series: terms[n] = 1/(R^n)'(R(x)), n = 0..L. The absolute
/// companion abs_partials is the forward Poincare series; with x a critical
/// point the partials are the S_L sums of the instability diagnostic.
inline SeriesLedger forward_series(const RationalMap& map, Cx x, int L, const Config& cfg) {
    if (L < 0 || static_cast<std::size_t>(L) > cfg.orbit_cap)
        throw Error(errc::budget, "series length exceeds orbit budget");
    MapJet first = map.eval(x, 0);
    if (first.pole) throw Error(errc::pole, "x maps to infinity");

    SeriesLedger led;
    led.label = "RP";
    DerivativeLadder lad = derivative_ladder(map, first.value, L);
    for (int n = 0; n <= L; ++n) {
        if (!lad.valid[n]) {
            led.truncated = true;
            led.truncation_reason = "escaped";
            break;
        }
        if (lad.products[n] == Cx{}) {
            led.push(Cx{}, TermFlag::pole);
            continue;
        }
        Cx term = 1.0 / lad.products[n];
        if (!is_finite(term)) {
            led.truncated = true;
            led.truncation_reason = "overflow";
            break;
        }
        led.push(term);
    }
    return led;
}

/// Backward series RS(x,R,a): terms[n] = ((R^*)^n tau_a)(x) via the span
/// closed form. Requires the normalized-map machinery.
inline SeriesLedger rs_series(const RationalMap& map, Cx x, Cx a, int L, const Config& cfg) {
    if (L < 0) throw Error(errc::bad_input, "negative series length");
    SeriesLedger led;
    led.label = "RS";
    SpanFunction g = SpanFunction::tau(a, Cx{1.0}, cfg);
    for (int n = 0; n <= L; ++n) {
        PointValue v = g.eval(x);
        led.push(v.pole ? Cx{} : v.value, v.pole ? TermFlag::pole : TermFlag::ok);
        if (n == L) break;
        g = span_pushforward(map, g, cfg);
        if (g.size() > cfg.span_cap) {
            led.truncated = true;
            led.truncation_reason = "span-budget";
            break;
        }
    }
    return led;
}

/// Backward Poincare series S(x,R): terms[n] = sum_{R^n(y)=x} 1/|(R^n)'(y)|^2
/// from the preimage tree. Levels past the node budget truncate the ledger.
inline SeriesLedger s_series(const RationalMap& map, Cx x, int L, const Config& cfg) {
    if (L < 0) throw Error(errc::bad_input, "negative series length");
    int feasible = 0;
    double projected = 1.0;
    while (feasible < L) {
        projected *= map.degree();
        if (projected > double(cfg.preimage_node_cap)) break;
        ++feasible;
    }

    SeriesLedger led;
    led.label = "S";
    PreimageTree tree(map, x, feasible, cfg);
    for (int n = 0; n <= feasible; ++n) {
        bool pole = false;
        CompensatedSum s;
        for (const auto& node : tree.level(n)) {
            if (node.path_deriv == Cx{}) {
                pole = true;
                break;
            }
            double m = std::abs(node.path_deriv);
            s.add(double(node.multiplicity) / (m * m));
        }
        led.push(pole ? Cx{} : Cx{s.value(), 0.0}, pole ? TermFlag::pole : TermFlag::ok);
    }
    if (feasible < L) {
        led.truncated = true;
        led.truncation_reason = "node-budget";
    }
    return led;
}

struct BackwardSeries {
    SeriesLedger rs;
    SeriesLedger s;
};

inline BackwardSeries backward_series(const RationalMap& map, Cx x, Cx a, int L,
                                      const Config& cfg) {
    return {rs_series(map, x, a, L, cfg), s_series(map, x, L, cfg)};
}

/// Modified series A(x,R,a): terms[n] = 1/((R^n)'(a) (x - R^n(a))). Orbit
/// points of a colliding with x flag their index.
inline SeriesLedger modified_series(const RationalMap& map, Cx x, Cx a, int L,
                                    const Config& cfg) {
    if (L < 0 || static_cast<std::size_t>(L) > cfg.orbit_cap)
        throw Error(errc::budget, "series length exceeds orbit budget");
    SeriesLedger led;
    led.label = "A";
    DerivativeLadder lad = derivative_ladder(map, a, L);
    for (int n = 0; n <= L; ++n) {
        if (!lad.valid[n]) {
            led.truncated = true;
            led.truncation_reason = "escaped";
            break;
        }
        Cx gap = x - lad.points[n];
        if (lad.products[n] == Cx{} || close(lad.points[n], x, cfg.tau_cluster)) {
            led.push(Cx{}, TermFlag::pole);
            continue;
        }
        Cx term = 1.0 / (lad.products[n] * gap);
        if (!is_finite(term)) {
            led.push(Cx{}, TermFlag::pole);
            continue;
        }
        led.push(term);
    }
    return led;
}

/// Zero-based Cauchy product c_n = sum_{k=0}^n a_k b_{n-k}, n = 0..L.
inline SeriesLedger cauchy_product(const SeriesLedger& A, const SeriesLedger& B, int L) {
    if (L < 0) throw Error(errc::bad_input, "negative series length");
    if (A.terms.size() <= static_cast<std::size_t>(L) ||
        B.terms.size() <= static_cast<std::size_t>(L))
        throw Error(errc::length_mismatch, "ledgers shorter than requested product length");
    SeriesLedger out;
    out.label = "custom";
    for (int n = 0; n <= L; ++n) {
        bool bad = false;
        CompensatedCxSum s;
        for (int k = 0; k <= n; ++k) {
            if (A.flags[k] != TermFlag::ok || B.flags[n - k] != TermFlag::ok) {
                bad = true;
                break;
            }
            s.add(A.terms[k] * B.terms[n - k]);
        }
        out.push(bad ? Cx{} : s.value(), bad ? TermFlag::not_computable : TermFlag::ok);
    }
    return out;
}

/// Residuals of the two series identities at matched truncation depth L
/// (both sides cut at total operator depth L; the Cauchy products then run
/// through convolution index L-1).
///
///   (1)  RS(x,R,a)|_L = A(x,R,a)|_L
///          + sum_i b_i sum_{j=0}^{L-1} conv_j(A(c_i,R,a), RS(x,R,d_i))
///   (2)  sum_{n=1}^{L} 1/(R^n)'(a) = sum_{n=1}^{L} lambda^n
///          - sum_i b_i sum_{j=0}^{L-1} conv_j(RS(c_i,R,a), RP(c_i,R))
///
/// with b_i = 1/R''(c_i) and lambda the multiplier of the fixed point at
/// infinity. Both identities are exact term-by-term, so the residuals sit at
/// rounding level for any L.
struct IdentityResiduals {
    double rs_residual = 0.0;  // relation (1)
    double rp_residual = 0.0;  // relation (2)
    bool rs_valid = false;
    bool rp_valid = false;
};

inline IdentityResiduals c2_residuals(const RationalMap& map, Cx a, Cx x, int L,
                                      const Config& cfg) {
    if (L < 0) throw Error(errc::bad_input, "negative truncation depth");
    map.require_simple_critical();
    if (!map.fixes_infinity())
        throw Error(errc::bad_input, "map must fix infinity");
    map.require_normalized(cfg);

    const auto& cps = map.critical_points();
    IdentityResiduals out;

    // relation (1)
    {
        SeriesLedger lhs = rs_series(map, x, a, L, cfg);
        SeriesLedger ax = modified_series(map, x, a, L, cfg);
        bool ok = lhs.clean_through(L) && ax.clean_through(L);
        CompensatedCxSum rhs;
        if (ok) rhs.add(ax.partials[static_cast<std::size_t>(L)]);
        for (std::size_t i = 0; ok && i < cps.size() && L >= 1; ++i) {
            SeriesLedger ac = modified_series(map, cps[i].point, a, L - 1, cfg);
            SeriesLedger rsd = rs_series(map, x, cps[i].value, L - 1, cfg);
            if (!ac.clean_through(L - 1) || !rsd.clean_through(L - 1) ||
                cps[i].value_infinite) {
                ok = false;
                break;
            }
            SeriesLedger conv = cauchy_product(ac, rsd, L - 1);
            rhs.add(cps[i].residue * conv.partials[static_cast<std::size_t>(L - 1)]);
        }
        if (ok) {
            out.rs_valid = true;
            out.rs_residual = std::abs(lhs.partials[static_cast<std::size_t>(L)] - rhs.value());
        }
    }

    // relation (2)
    {
        DerivativeLadder lad = derivative_ladder(map, a, L);
        bool ok = true;
        CompensatedCxSum lhs;
        for (int n = 1; n <= L; ++n) {
            if (!lad.valid[n] || lad.products[n] == Cx{}) {
                ok = false;
                break;
            }
            lhs.add(1.0 / lad.products[n]);
        }
        CompensatedCxSum rhs;
        Cx lam = map.omega();
        Cx lam_pow{1.0};
        for (int n = 1; n <= L; ++n) {
            lam_pow *= lam;
            rhs.add(lam_pow);
        }
        for (std::size_t i = 0; ok && i < cps.size() && L >= 1; ++i) {
            SeriesLedger rsc = rs_series(map, cps[i].point, a, L - 1, cfg);
            SeriesLedger rpc = forward_series(map, cps[i].point, L - 1, cfg);
            if (!rsc.clean_through(L - 1) || !rpc.clean_through(L - 1)) {
                ok = false;
                break;
            }
            SeriesLedger conv = cauchy_product(rsc, rpc, L - 1);
            rhs.add(-cps[i].residue * conv.partials[static_cast<std::size_t>(L - 1)]);
        }
        if (ok) {
            out.rp_valid = true;
            out.rp_residual = std::abs(lhs.value() - rhs.value());
        }
    }
    return out;
}

}  // namespace ruelle
