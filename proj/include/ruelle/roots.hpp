#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/polynomial.hpp"

namespace ruelle {

/// A root (cluster centroid) with its multiplicity estimate. Simple roots
/// have multiplicity 1; near-coincident roots within tau_cluster are merged.
struct RootCluster {
    Cx point;
    int multiplicity = 1;
};

namespace detail {

/// Horner value/derivative plus the Adams running error bound e_k, so the
/// stop test |p| <= tol * e_k tracks attainable accuracy per point.
struct HornerEval {
    Cx p, dp;
    double err;
};

inline HornerEval horner_with_bound(const std::vector<Cx>& c, Cx z) {
    Cx p{0.0}, dp{0.0};
    double az = std::abs(z), e = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        dp = dp * z + p;
        p = p * z + *it;
        e = e * az + std::abs(p);
    }
    return {p, dp, e};
}

inline Cx stable_sqrt_pick(Cx b, Cx sq) {
    // sign choice maximizing |b + s| to avoid cancellation
    return (std::real(std::conj(b) * sq) >= 0.0) ? b + sq : b - sq;
}

/// Both roots of c0 + c1 z + c2 z^2 with the numerically stable formula.
inline void solve_quadratic(Cx c0, Cx c1, Cx c2, Cx& r0, Cx& r1) {
    Cx sq = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
    Cx q = -0.5 * stable_sqrt_pick(c1, sq);
    if (q == Cx{}) {
        r0 = Cx{};
        r1 = Cx{};
        return;
    }
    r0 = q / c2;
    r1 = c0 / q;
}

}  // namespace detail

/// All complex roots of p by simultaneous Aberth-Ehrlich iteration with
/// Newton polishing. Deterministic: fixed initial configuration, fixed sweep
/// order, final sort by (re, im). Near-coincident roots are reported as one
/// cluster with a multiplicity count.
///
/// Throws Error("root-failure") if the iteration budget is exhausted before
/// every point satisfies the Adams residual test.
inline std::vector<RootCluster> find_roots(const Polynomial& poly, const Config& cfg) {
    Polynomial p = poly.trimmed(cfg.tau_trim);
    if (p.is_zero()) throw Error(errc::bad_input, "cannot solve the zero polynomial");
    if (p.degree() == 0) return {};

    std::vector<Cx> c = p.coeffs();

    // peel off exact roots at the origin
    int zero_mult = 0;
    while (c.size() > 1 && c.front() == Cx{}) {
        c.erase(c.begin());
        ++zero_mult;
    }

    const int n = static_cast<int>(c.size()) - 1;
    std::vector<Cx> roots;
    roots.reserve(n + zero_mult);

    if (n == 1) {
        roots.push_back(-c[0] / c[1]);
    } else if (n == 2) {
        Cx r0, r1;
        detail::solve_quadratic(c[0], c[1], c[2], r0, r1);
        roots.push_back(r0);
        roots.push_back(r1);
    } else if (n >= 3) {
        // Cauchy bound for the initial circle
        double bound = 0.0;
        for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i] / c[n]));
        double r0 = 0.5 * (1.0 + bound);

        roots.resize(n);
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (int k = 0; k < n; ++k) {
            double radius = r0 * (0.8 + 0.4 * double(k) / double(n));
            double angle = two_pi * (double(k) + 0.35) / double(n) + 0.5;
            roots[k] = radius * Cx{std::cos(angle), std::sin(angle)};
        }

        std::vector<char> done(n, 0);
        const int max_sweeps = 120;
        constexpr double eps = std::numeric_limits<double>::epsilon();
        bool converged = false;
        for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
            converged = true;
            for (int i = 0; i < n; ++i) {
                if (done[i]) continue;
                auto ev = detail::horner_with_bound(c, roots[i]);
                // residual target: requested relative accuracy, floored at
                // the evaluation noise level of the Horner pass
                double target = std::max(cfg.tau_root, 8.0 * eps) * std::max(ev.err, 1e-300);
                if (std::abs(ev.p) <= target) {
                    done[i] = 1;
                    continue;
                }
                converged = false;

                Cx w;
                if (ev.dp == Cx{}) {
                    w = (std::abs(roots[i]) + 1.0) * Cx{0.3, 0.7};
                } else {
                    Cx newton = ev.p / ev.dp;
                    Cx s{0.0};
                    for (int j = 0; j < n; ++j) {
                        if (j == i) continue;
                        Cx d = roots[i] - roots[j];
                        if (d == Cx{}) d = Cx{1e-12, 1e-12};
                        s += 1.0 / d;
                    }
                    Cx denom = 1.0 - newton * s;
                    w = (denom == Cx{}) ? newton : newton / denom;
                }
                roots[i] -= w;
            }
        }
        if (!converged) {
            // one last check with a looser factor before giving up
            bool ok = true;
            for (int i = 0; i < n; ++i) {
                auto ev = detail::horner_with_bound(c, roots[i]);
                if (std::abs(ev.p) > 1e4 * eps * ev.err) ok = false;
            }
            if (!ok) throw Error(errc::root_failure, "root iteration did not converge");
        }

        // Newton polish, keeping a step only when it shrinks the residual
        for (int i = 0; i < n; ++i) {
            for (int it = 0; it < 3; ++it) {
                auto ev = detail::horner_with_bound(c, roots[i]);
                if (ev.dp == Cx{}) break;
                Cx step = ev.p / ev.dp;
                if (!is_finite(step)) break;
                Cx cand = roots[i] - step;
                if (std::abs(detail::horner_with_bound(c, cand).p) <= std::abs(ev.p))
                    roots[i] = cand;
                else
                    break;
            }
        }
    }

    for (int k = 0; k < zero_mult; ++k) roots.push_back(Cx{});

    std::sort(roots.begin(), roots.end(), lex_less);

    // greedy chain clustering within tau_cluster
    std::vector<RootCluster> out;
    std::size_t i = 0;
    while (i < roots.size()) {
        std::size_t j = i + 1;
        Cx acc = roots[i];
        while (j < roots.size() &&
               std::abs(roots[j] - roots[j - 1]) <=
                   cfg.tau_cluster * std::max(1.0, std::abs(roots[j]))) {
            acc += roots[j];
            ++j;
        }
        int mult = static_cast<int>(j - i);
        out.push_back({acc / double(mult), mult});
        i = j;
    }
    return out;
}

/// Flatten clusters back to degree-many points, repeating by multiplicity.
inline std::vector<Cx> expand_clusters(const std::vector<RootCluster>& clusters) {
    std::vector<Cx> out;
    for (const auto& c : clusters)
        for (int k = 0; k < c.multiplicity; ++k) out.push_back(c.point);
    return out;
}

}  // namespace ruelle
