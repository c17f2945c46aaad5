#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/rational_map.hpp"

namespace ruelle {

/// Instability diagnostic for a critical point c. Tracks
///   |(R^n)'(R(c))|, the partial sums S_L = sum_{j<=L} 1/(R^j)'(R(c)),
/// and the boundedness of the orbit of R(c). A subsequence of indices with
/// bounded orbit is detected by a sliding window; on it the two sufficient
/// instability hypotheses are evaluated:
///   (1) |(R^{n_i})'| -> infinity with limsup |S_{n_i}| > 0
///   (2) |(R^{n_i})'| ~ const with limsup |S_{n_i}| = infinity.
/// Either one met yields the verdict "unstable (within explored range)";
/// otherwise "inconclusive". The detector is a heuristic; thresholds below.
struct InstabilityReport {
    std::vector<double> derivative_magnitudes;  // |(R^n)'(R(c))|, n = 0..N
    std::vector<Cx> s_partials;                 // S_0..S_N
    std::vector<int> bounded_indices;           // detected subsequence
    bool orbit_postcritically_finite = false;
    bool orbit_escaped = false;
    int growth_case = 0;  // 1: decay to 0, 2: growth to inf, 3: bounded nonzero, 0: unclear
    bool hypothesis_growth = false;    // case (1)
    bool hypothesis_constant = false;  // case (2)
    std::string verdict;
};

namespace detail {

inline double default_bounded_radius(const RationalMap& map) {
    if (map.is_polynomial()) {
        // for |z| > (1 + sum_{i<d} |a_i|)/|a_d| (and > 1) the orbit escapes
        const auto& c = map.numerator().coeffs();
        double s = 1.0;
        for (std::size_t i = 0; i + 1 < c.size(); ++i) s += std::abs(c[i]);
        return std::max(1.0, s / std::abs(c.back()));
    }
    return 1e3;
}

}  // namespace detail

inline InstabilityReport instability_diagnostic(const RationalMap& map, std::size_t critical_index,
                                                int N, int subsequence_window, const Config& cfg,
                                                double bounded_radius = 0.0) {
    if (critical_index >= map.critical_points().size())
        throw Error(errc::bad_input, "critical index out of range");
    if (N < 0) throw Error(errc::bad_input, "N must be >= 0");
    if (subsequence_window < 1) subsequence_window = 1;

    InstabilityReport rep;
    rep.verdict = "inconclusive";
    if (N == 0) return rep;

    const auto& cp = map.critical_points()[critical_index];
    if (cp.value_infinite) {
        rep.orbit_escaped = true;
        return rep;
    }
    double radius = bounded_radius > 0.0 ? bounded_radius : detail::default_bounded_radius(map);

    // orbit of R(c) with derivative products and S partials
    DerivativeLadder lad = derivative_ladder(map, cp.value, N);
    Cx s_acc{};
    int usable = 0;
    for (int n = 0; n <= N; ++n) {
        if (!lad.valid[n] || lad.products[n] == Cx{}) break;
        double mag = std::abs(lad.products[n]);
        if (!std::isfinite(mag)) break;
        rep.derivative_magnitudes.push_back(mag);
        s_acc += 1.0 / lad.products[n];
        rep.s_partials.push_back(s_acc);
        ++usable;
    }
    if (usable == 0) {
        rep.orbit_escaped = true;
        return rep;
    }
    if (usable <= N) rep.orbit_escaped = !lad.valid[usable];

    // eventually periodic orbit of R(c) (postcritically finite side note)
    {
        OrbitRecord rec = orbit(map, cp.value, std::min(N, 512), cfg);
        rep.orbit_postcritically_finite = rec.flag == OrbitFlag::converged_to_cycle;
    }

    // sliding-window bounded-orbit subsequence: index n selected when the
    // orbit points over the trailing window stay inside the radius
    for (int n = 0; n < usable; ++n) {
        bool inside = true;
        for (int j = std::max(0, n - subsequence_window + 1); j <= n; ++j) {
            // orbit point R^{n+1}(R(c)) = lad.points[n+1]
            if (j + 1 >= static_cast<int>(lad.points.size()) || !lad.valid[j + 1] ||
                std::abs(lad.points[j + 1]) > radius) {
                inside = false;
                break;
            }
        }
        if (inside) rep.bounded_indices.push_back(n);
    }

    // growth classification over the detected subsequence
    const auto& sub = rep.bounded_indices;
    if (sub.size() >= 2) {
        double first = rep.derivative_magnitudes[sub.front()];
        double last = rep.derivative_magnitudes[sub.back()];
        double mn = first, mx = first;
        for (int i : sub) {
            mn = std::min(mn, rep.derivative_magnitudes[i]);
            mx = std::max(mx, rep.derivative_magnitudes[i]);
        }
        if (last <= 1e-6 * std::max(first, 1.0) && last < 1e-3)
            rep.growth_case = 1;
        else if (last >= 1e3 * std::max(first, 1e-300) || last > 1e12)
            rep.growth_case = 2;
        else if (mx <= 10.0 * mn && mx > 1e-6)
            rep.growth_case = 3;

        // limsup |S| over the later half of the subsequence
        double s_tail_max = 0.0;
        for (std::size_t i = sub.size() / 2; i < sub.size(); ++i)
            s_tail_max = std::max(s_tail_max, std::abs(rep.s_partials[sub[i]]));
        double s_front_max = 0.0;
        for (std::size_t i = 0; i < std::max<std::size_t>(1, sub.size() / 2); ++i)
            s_front_max = std::max(s_front_max, std::abs(rep.s_partials[sub[i]]));

        rep.hypothesis_growth = rep.growth_case == 2 && s_tail_max > 1e-8;
        rep.hypothesis_constant =
            rep.growth_case == 3 && (s_tail_max > 1e6 || s_tail_max >= 1e3 * std::max(s_front_max, 1.0));
    } else if (rep.orbit_escaped) {
        rep.growth_case = 2;  // derivative overflow treated as growth, noted by the escape flag
    }

    if (rep.hypothesis_growth || rep.hypothesis_constant)
        rep.verdict = "unstable (within explored range)";
    return rep;
}

/// Empirical hyperbolicity check: every critical orbit must be attracted to
/// an attracting or superattracting cycle (or escape to infinity, the
/// attracting cycle there). Landing on an indifferent or repelling cycle, or
/// exhausting the budget, leaves the verdict undetermined.
enum class OrbitVerdict { attracted, escaped, undetermined };

struct CriticalOrbitReport {
    Cx critical_point{};
    OrbitVerdict verdict = OrbitVerdict::undetermined;
    int cycle_period = 0;
    double cycle_multiplier_abs = 0.0;
};

struct HyperbolicityReport {
    std::vector<CriticalOrbitReport> orbits;
    bool hyperbolic_within_budget = false;
};

inline HyperbolicityReport hyperbolicity_check(const RationalMap& map, int budget,
                                               const Config& cfg) {
    if (budget < 1) throw Error(errc::bad_input, "budget must be >= 1");
    HyperbolicityReport rep;
    double escape_radius = detail::default_bounded_radius(map);

    bool all_good = true;
    for (const auto& cp : map.critical_points()) {
        CriticalOrbitReport r;
        r.critical_point = cp.point;
        if (cp.value_infinite) {
            // critical point is a multiple pole: orbit sits at the fixed point infinity
            r.verdict = map.fixes_infinity() ? OrbitVerdict::escaped : OrbitVerdict::undetermined;
            rep.orbits.push_back(r);
            all_good = all_good && r.verdict != OrbitVerdict::undetermined;
            continue;
        }
        OrbitRecord rec = orbit(map, cp.point, budget, cfg);
        if (rec.flag == OrbitFlag::escaped ||
            (map.is_polynomial() && !rec.points.empty() &&
             std::abs(rec.points.back()) > escape_radius &&
             rec.flag != OrbitFlag::converged_to_cycle)) {
            r.verdict = OrbitVerdict::escaped;
        } else if (rec.flag == OrbitFlag::converged_to_cycle) {
            r.cycle_period = std::max(1, rec.cycle_period);
            Cx mult{1.0};
            for (int j = rec.cycle_start; j < rec.cycle_start + r.cycle_period; ++j) {
                MapJet jet = map.eval(rec.points[j], 1);
                if (jet.pole) {
                    mult = Cx{2.0};  // through infinity; treat as not attracting
                    break;
                }
                mult *= jet.d1;
            }
            r.cycle_multiplier_abs = std::abs(mult);
            r.verdict = r.cycle_multiplier_abs < 1.0 - 1e-9 ? OrbitVerdict::attracted
                                                            : OrbitVerdict::undetermined;
        }
        all_good = all_good && r.verdict != OrbitVerdict::undetermined;
        rep.orbits.push_back(r);
    }
    rep.hyperbolic_within_budget = all_good && !rep.orbits.empty();
    return rep;
}

}  // namespace ruelle
