#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/polynomial.hpp"
#include "ruelle/preimage.hpp"
#include "ruelle/rational_map.hpp"

namespace ruelle {

/// One critical point d of P^n: d lies in P^{-k}(c) for a critical point c
/// of P, and the residue of 1/(P^n)' at d is
///   b = 1/(P^n)''(d) = 1 / ( P''(c) (P^{n-k-1})'(P(c)) ((P^k)'(d))^2 ).
struct ResidueEntry {
    Cx point{};          // d
    Cx source{};         // c with P^k(d) = c
    int source_index = 0;
    int level = 0;       // k
    int multiplicity = 1;
    Cx residue{};
    bool flagged = false;  // zero denominator / critical collision
};

struct ResidueTable {
    int n = 0;
    std::vector<ResidueEntry> entries;
    double bn_direct = 0.0;    // sum |b| over closed-form residues
    double bn_c1_raw = 0.0;    // triple sum with inner index j = 1..n-1
    double bn_c1 = 0.0;        // triple sum plus the k = 0 boundary entries
    double discrepancy = 0.0;  // |bn_direct - bn_c1|
    int flagged_count = 0;
};

namespace detail {

inline void require_residue_map(const RationalMap& map) {
    if (!map.is_polynomial())
        throw Error(errc::unsupported, "residue analysis is defined for polynomials");
    map.require_simple_critical();
}

}  // namespace detail

/// The critical points of P^n: the union over k = 0..n-1 of P^{-k}(Cr(P)),
/// with levels and sources attached. Residues are left unset.
inline std::vector<ResidueEntry> iterate_critical_points(const RationalMap& map, int n,
                                                         const Config& cfg) {
    detail::require_residue_map(map);
    if (n < 1) throw Error(errc::bad_input, "n must be >= 1");
    std::vector<ResidueEntry> out;
    const auto& cps = map.critical_points();
    for (std::size_t ci = 0; ci < cps.size(); ++ci) {
        PreimageTree tree(map, cps[ci].point, n - 1, cfg);
        for (int k = 0; k <= n - 1; ++k) {
            for (const auto& node : tree.level(k)) {
                ResidueEntry e;
                e.point = node.point;
                e.source = cps[ci].point;
                e.source_index = static_cast<int>(ci);
                e.level = k;
                e.multiplicity = node.multiplicity;
                e.flagged = node.critical_collision && k > 0;
                out.push_back(e);
            }
        }
    }
    return out;
}

/// Closed-form residue of 1/(P^n)' at d in P^{-k}(c). Throws on a zero
/// denominator (a critical relation).
inline Cx residue_closed_form(const RationalMap& map, Cx d, Cx c, int k, int n,
                              const Config& cfg) {
    detail::require_residue_map(map);
    if (k < 0 || k >= n) throw Error(errc::bad_input, "need 0 <= k < n");

    MapJet cj = map.eval(c, 2);
    if (cj.pole || cj.d2 == Cx{}) throw Error(errc::pole, "critical relation: P''(c) = 0");

    DerivativeLadder down = derivative_ladder(map, d, k);
    if (!down.valid[k] || !close(down.points[k], c, 1e4 * cfg.tau_cluster))
        throw Error(errc::bad_input, "d is not a depth-k preimage of c");
    Cx pk = down.products[k];  // (P^k)'(d)
    if (pk == Cx{}) throw Error(errc::pole, "critical relation along the backward orbit");

    DerivativeLadder fwd = derivative_ladder(map, cj.value, n - k - 1);
    if (!fwd.valid[n - k - 1]) throw Error(errc::pole, "forward orbit escaped");
    Cx fp = fwd.products[n - k - 1];  // (P^{n-k-1})'(P(c))
    if (fp == Cx{}) throw Error(errc::pole, "critical relation along the forward orbit");

    return 1.0 / (cj.d2 * fp * pk * pk);
}

/// Residue table of 1/(P^n)' with the absolute-residue total B_n computed
/// two ways: directly from the closed-form entries, and through the triple
/// sum over (critical point, forward depth, preimages). The raw triple sum
/// uses the inner range j = 1..n-1; bn_c1 adds the k = 0 boundary entries so
/// the two routes count the same set.
inline ResidueTable bn(const RationalMap& map, int n, const Config& cfg) {
    detail::require_residue_map(map);
    if (n < 1) throw Error(errc::bad_input, "n must be >= 1");

    ResidueTable table;
    table.n = n;
    const auto& cps = map.critical_points();

    CompensatedSum direct, c1_raw, c1_boundary;

    for (std::size_t ci = 0; ci < cps.size(); ++ci) {
        MapJet cj = map.eval(cps[ci].point, 2);
        Cx ppc = cj.d2;  // P''(c), nonzero for simple critical points
        DerivativeLadder fwd = derivative_ladder(map, cps[ci].value, n - 1);
        PreimageTree tree(map, cps[ci].point, n - 1, cfg);

        for (int k = 0; k <= n - 1; ++k) {
            bool fwd_ok = fwd.valid[n - 1 - k] && fwd.products[n - 1 - k] != Cx{};
            Cx fp = fwd_ok ? fwd.products[n - 1 - k] : Cx{};
            CompensatedSum level_modulus;  // sum over preimages of 1/|(P^k)'(y)|^2
            for (const auto& node : tree.level(k)) {
                ResidueEntry e;
                e.point = node.point;
                e.source = cps[ci].point;
                e.source_index = static_cast<int>(ci);
                e.level = k;
                e.multiplicity = node.multiplicity;
                bool collision = (node.critical_collision && k > 0) || node.path_deriv == Cx{};
                if (collision || !fwd_ok) {
                    e.flagged = true;
                    ++table.flagged_count;
                } else {
                    Cx pk = node.path_deriv;
                    e.residue = 1.0 / (ppc * fp * pk * pk);
                    direct.add(double(node.multiplicity) * std::abs(e.residue));
                    double am = std::abs(pk);
                    level_modulus.add(double(node.multiplicity) / (am * am));
                }
                table.entries.push_back(e);
            }
            if (fwd_ok) {
                double contrib = level_modulus.value() / (std::abs(ppc) * std::abs(fp));
                if (k == 0)
                    c1_boundary.add(contrib);
                else
                    c1_raw.add(contrib);
            }
        }
    }

    table.bn_direct = direct.value();
    table.bn_c1_raw = c1_raw.value();
    table.bn_c1 = c1_raw.value() + c1_boundary.value();
    table.discrepancy = std::abs(table.bn_direct - table.bn_c1);
    return table;
}

/// Residue-sum vs contour-integral cross check:
///   sum_i b_i^n h(c_i^n)   vs   (1/2 pi i) closed-integral h/(P^n)' dz
/// on a circle of radius 2 (1 + max |critical point of P^n|), trapezoid rule
/// with node doubling until two passes agree to 1e-9.
struct ContourResult {
    Cx residue_sum{};
    Cx quadrature{};
    double discrepancy = 0.0;
    int nodes_used = 0;
};

inline ContourResult contour_oracle(const RationalMap& map, int n, const Polynomial& h,
                                    const Config& cfg) {
    ResidueTable table = bn(map, n, cfg);
    if (table.flagged_count > 0)
        throw Error(errc::pole, "flagged residue entries; contour oracle needs a clean table");

    ContourResult out;
    CompensatedCxSum rs;
    double maxabs = 0.0;
    for (const auto& e : table.entries) {
        rs.add(double(e.multiplicity) * e.residue * h.eval(e.point));
        maxabs = std::max(maxabs, std::abs(e.point));
    }
    out.residue_sum = rs.value();

    const double radius = 2.0 * (1.0 + maxabs);
    auto iterate_deriv = [&](Cx z) {
        // (P^n)'(z) = prod_j P'(P^j(z)), chain rule
        Cx prod{1.0}, w = z;
        for (int j = 0; j < n; ++j) {
            MapJet jet = map.eval(w, 1);
            prod *= jet.d1;
            w = jet.value;
        }
        return prod;
    };

    constexpr double two_pi = 2.0 * std::numbers::pi;
    Cx previous{};
    bool have_previous = false;
    for (int nodes = 1 << 10; nodes <= (1 << 18); nodes <<= 1) {
        CompensatedCxSum acc;
        for (int k = 0; k < nodes; ++k) {
            double th = two_pi * double(k) / double(nodes);
            Cx z = radius * Cx{std::cos(th), std::sin(th)};
            acc.add(h.eval(z) / iterate_deriv(z) * z);
        }
        Cx value = acc.value() / double(nodes);
        out.nodes_used = nodes;
        if (have_previous && std::abs(value - previous) <= 1e-9 * std::max(1.0, std::abs(value))) {
            out.quadrature = value;
            out.discrepancy = std::abs(out.quadrature - out.residue_sum);
            return out;
        }
        previous = value;
        have_previous = true;
    }
    throw Error(errc::quadrature, "contour quadrature did not stabilize");
}

/// B_1..B_{n_max} with a descriptive least-squares growth rate of log B_n.
/// The boundedness verdict is only a statement about the explored range:
/// bounded when the fitted slope is <= 0.02.
struct StrongConvergenceReport {
    std::vector<double> bn_values;      // index 0 -> B_1
    std::vector<double> discrepancies;  // direct vs triple-sum per n
    std::vector<int> flagged_counts;
    double growth_rate = 0.0;
    bool bounded_within_range = false;
    std::string verdict;  // "... (within explored range)"
};

inline StrongConvergenceReport strong_convergence_report(const RationalMap& map, int n_max,
                                                         const Config& cfg) {
    detail::require_residue_map(map);
    if (n_max < 1) throw Error(errc::bad_input, "n_max must be >= 1");
    StrongConvergenceReport rep;
    for (int n = 1; n <= n_max; ++n) {
        ResidueTable t = bn(map, n, cfg);
        rep.bn_values.push_back(t.bn_direct);
        rep.discrepancies.push_back(t.discrepancy);
        rep.flagged_counts.push_back(t.flagged_count);
    }
    // least squares of log B_n against n, over positive entries
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int i = 0; i < n_max; ++i) {
        if (rep.bn_values[i] <= 0.0) continue;
        double xv = double(i + 1), yv = std::log(rep.bn_values[i]);
        sx += xv;
        sy += yv;
        sxx += xv * xv;
        sxy += xv * yv;
        ++m;
    }
    if (m >= 2) rep.growth_rate = (double(m) * sxy - sx * sy) / (double(m) * sxx - sx * sx);
    rep.bounded_within_range = rep.growth_rate <= 0.02;
    rep.verdict = rep.bounded_within_range ? "bounded (within explored range)"
                                           : "growing (within explored range)";
    return rep;
}

/// Per-n decay pair (1/|(P^n)'(P(c))| , |R^*|^n(1)(c)) for a critical point
/// c, and the minimal constant M with both sequences <= M/n over the
/// explored range.
struct DecayEnvelopes {
    std::vector<double> forward_decay;  // index 0 -> n = 1
    std::vector<double> modulus_power;
    double envelope_constant = 0.0;
};

inline DecayEnvelopes corollary_c_envelopes(const RationalMap& map, std::size_t critical_index,
                                            int n_max, const Config& cfg) {
    if (critical_index >= map.critical_points().size())
        throw Error(errc::bad_input, "critical index out of range");
    if (n_max < 1) throw Error(errc::bad_input, "n_max must be >= 1");
    const auto& cp = map.critical_points()[critical_index];
    if (cp.value_infinite) throw Error(errc::pole, "critical value at infinity");

    DecayEnvelopes env;
    DerivativeLadder fwd = derivative_ladder(map, cp.value, n_max);
    PreimageTree tree(map, cp.point, n_max, cfg);
    for (int n = 1; n <= n_max; ++n) {
        if (!fwd.valid[n] || fwd.products[n] == Cx{})
            throw Error(errc::pole, "forward orbit hit a critical point or escaped");
        env.forward_decay.push_back(1.0 / std::abs(fwd.products[n]));
        CompensatedSum s;
        for (const auto& node : tree.level(n)) {
            if (node.path_deriv == Cx{})
                throw Error(errc::pole, "backward orbit hit a critical point");
            double m = std::abs(node.path_deriv);
            s.add(double(node.multiplicity) / (m * m));
        }
        env.modulus_power.push_back(s.value());
        double bound = double(n) * std::max(env.forward_decay.back(), env.modulus_power.back());
        env.envelope_constant = std::max(env.envelope_constant, bound);
    }
    return env;
}

}  // namespace ruelle
