#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/rational_map.hpp"
#include "ruelle/span.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

/// Finite atomic measure: support points with complex masses. Atoms within
/// tau_cluster merge by mass addition; order is (re, im) of the support.
class AtomicMeasure {
public:
    struct Atom {
        Cx point{};
        Cx mass{};
    };

    AtomicMeasure() = default;

    void add(Cx point, Cx mass) {
        if (mass == Cx{}) return;
        atoms_.push_back({point, mass});
    }

    void finalize(const Config& cfg) {
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& a, const Atom& b) { return lex_less(a.point, b.point); });
        std::vector<Atom> out;
        for (const auto& a : atoms_) {
            if (!out.empty() && close(out.back().point, a.point, cfg.tau_cluster))
                out.back().mass += a.mass;
            else
                out.push_back(a);
        }
        atoms_ = std::move(out);
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }

    double total_variation() const {
        CompensatedSum s;
        for (const auto& a : atoms_) s.add(std::abs(a.mass));
        return s.value();
    }

    void scale(Cx s) {
        for (auto& a : atoms_) a.mass *= s;
    }

    void accumulate(const AtomicMeasure& o, Cx weight, const Config& cfg) {
        for (const auto& a : o.atoms_) add(a.point, weight * a.mass);
        finalize(cfg);
    }

private:
    std::vector<Atom> atoms_;
};

/// d-bar derivative of a span function as an atomic measure, mass = residue
/// (the analytic constant is dropped). Each gamma term (a, alpha)
/// contributes alpha (a-1) at 0, -alpha a at 1 and alpha at a. tau terms are
/// rejected unless allow_tau is set, in which case (a, beta) contributes a
/// single atom beta at a.
inline AtomicMeasure measure_from_span(const SpanFunction& f, const Config& cfg,
                                       bool allow_tau = false) {
    if (!allow_tau && !f.tau_terms().empty())
        throw Error(errc::unsupported, "span has tau terms; enable the tau-atom mode");
    AtomicMeasure mu;
    for (const auto& t : f.gamma_terms()) {
        mu.add(Cx{0.0}, t.coeff * (t.pole - 1.0));
        mu.add(Cx{1.0}, -t.coeff * t.pole);
        mu.add(t.pole, t.coeff);
    }
    if (allow_tau)
        for (const auto& t : f.tau_terms()) mu.add(t.pole, t.coeff);
    mu.finalize(cfg);
    return mu;
}

/// mu_n for the i-th critical value: the measure of (R^*)^n gamma_{d_i}.
inline AtomicMeasure mu_n(const RationalMap& map, std::size_t critical_index, int n,
                          const Config& cfg) {
    map.require_normalized(cfg);
    map.require_simple_critical();
    if (critical_index >= map.critical_points().size())
        throw Error(errc::bad_input, "critical index out of range");
    const auto& cp = map.critical_points()[critical_index];
    if (cp.value_infinite || close(cp.value, Cx{0.0}, cfg.tau_cluster) ||
        close(cp.value, Cx{1.0}, cfg.tau_cluster))
        throw Error(errc::unsupported, "degenerate critical value: gamma kernel vanishes");
    SpanFunction f = SpanFunction::gamma(cp.value, Cx{1.0}, cfg);
    for (int k = 0; k < n; ++k) {
        f = span_pushforward(map, f, cfg);
        if (f.size() > cfg.span_cap) throw Error(errc::budget, "span exceeded budget");
    }
    return measure_from_span(f, cfg);
}

/// Cesaro average nu_l = (1/l) sum_{k=0}^{l-1} mu_k, atom-wise.
inline AtomicMeasure nu_l(const RationalMap& map, std::size_t critical_index, int l,
                          const Config& cfg) {
    if (l < 1) throw Error(errc::bad_input, "l must be >= 1");
    AtomicMeasure acc;
    for (int k = 0; k < l; ++k)
        acc.accumulate(mu_n(map, critical_index, k, cfg), Cx{1.0}, cfg);
    acc.scale(Cx{1.0 / double(l)});
    return acc;
}

/// Weak-* pairing <mu, h> = sum mass * h(atom).
inline Cx pair_measure(const AtomicMeasure& mu, const Field& h) {
    CompensatedCxSum s;
    for (const auto& a : mu.atoms()) s.add(a.mass * h(a.point));
    return s.value();
}

/// Cauchy transform F(a) = sum mass * tau_a(atom) = sum mass/(atom - a).
inline PointValue cauchy_transform(const AtomicMeasure& mu, Cx a, const Config& cfg) {
    CompensatedCxSum s;
    for (const auto& at : mu.atoms()) {
        if (close(at.point, a, cfg.tau_cluster)) return {Cx{}, true};
        s.add(at.mass / (at.point - a));
    }
    return {s.value(), false};
}

/// Pairings <nu_l, h> over a grid of l values and a suite of test
/// functions, with the successive difference |<nu_l, h> - <nu_{l'}, h>|
/// against the previous grid entry. No convergence claim beyond the grid.
struct ConvergenceRow {
    int l = 0;
    int test_index = 0;
    Cx pairing{};
    double delta_vs_previous = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<double> total_variations;  // TV(nu_l) per grid entry
};

inline ConvergenceReport convergence_report(const RationalMap& map, std::size_t critical_index,
                                            const std::vector<int>& l_grid,
                                            const std::vector<Field>& test_suite,
                                            const Config& cfg) {
    ConvergenceReport rep;
    if (l_grid.empty()) return rep;
    int l_max = *std::max_element(l_grid.begin(), l_grid.end());

    // one pass of mu_0..mu_{l_max - 1}, then prefix averages
    std::vector<AtomicMeasure> mus;
    {
        SpanFunction f = SpanFunction::gamma(
            map.critical_points().at(critical_index).value, Cx{1.0}, cfg);
        map.require_normalized(cfg);
        for (int k = 0; k < l_max; ++k) {
            mus.push_back(measure_from_span(f, cfg));
            if (k + 1 < l_max) {
                f = span_pushforward(map, f, cfg);
                if (f.size() > cfg.span_cap) throw Error(errc::budget, "span exceeded budget");
            }
        }
    }

    std::vector<Cx> previous(test_suite.size(), Cx{});
    bool have_previous = false;
    for (int l : l_grid) {
        if (l < 1 || l > l_max) throw Error(errc::bad_input, "bad l grid entry");
        AtomicMeasure nu;
        for (int k = 0; k < l; ++k) nu.accumulate(mus[k], Cx{1.0}, cfg);
        nu.scale(Cx{1.0 / double(l)});
        rep.total_variations.push_back(nu.total_variation());
        for (std::size_t t = 0; t < test_suite.size(); ++t) {
            ConvergenceRow row;
            row.l = l;
            row.test_index = static_cast<int>(t);
            row.pairing = pair_measure(nu, test_suite[t]);
            row.delta_vs_previous = have_previous ? std::abs(row.pairing - previous[t]) : 0.0;
            previous[t] = row.pairing;
            rep.rows.push_back(row);
        }
        have_previous = true;
    }
    return rep;
}

}  // namespace ruelle
