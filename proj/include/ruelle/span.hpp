#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"

namespace ruelle {

/// gamma_a(z) = a(a-1) / (z (z-1) (z-a)): the integrable kernel with simple
/// poles at 0, 1 and a. Identically zero for a in {0, 1}.
inline Cx gamma_kernel(Cx a, Cx z) {
    return a * (a - 1.0) / (z * (z - 1.0) * (z - a));
}

/// tau_a(z) = 1/(z - a).
inline Cx tau_kernel(Cx a, Cx z) { return 1.0 / (z - a); }

struct PointValue {
    Cx value{};
    bool pole = false;
};

enum class BasisTag { zero, gamma, tau, mixed };

/// A finite linear combination of gamma and tau kernels plus a constant.
/// Terms are kept sorted by pole (re, im); poles closer than tau_cluster are
/// merged by coefficient addition, and coefficients below tau_drop relative
/// to the largest one are purged. gamma poles at 0 or 1 are dropped outright
/// since those kernels vanish identically.
class SpanFunction {
public:
    struct Term {
        Cx pole{};
        Cx coeff{};
    };

    SpanFunction() = default;

    static SpanFunction zero() { return {}; }

    static SpanFunction gamma(Cx a, Cx coeff, const Config& cfg) {
        SpanFunction f;
        f.add_gamma(a, coeff, cfg);
        f.finalize(cfg);
        return f;
    }

    static SpanFunction tau(Cx a, Cx coeff, const Config& cfg) {
        SpanFunction f;
        f.add_tau(a, coeff, cfg);
        f.finalize(cfg);
        return f;
    }

    const std::vector<Term>& gamma_terms() const { return gamma_; }
    const std::vector<Term>& tau_terms() const { return tau_; }
    Cx constant_term() const { return const_; }
    void set_constant(Cx v) { const_ = v; }

    std::size_t size() const { return gamma_.size() + tau_.size(); }

    BasisTag basis_tag() const {
        if (gamma_.empty() && tau_.empty()) return BasisTag::zero;
        if (tau_.empty()) return BasisTag::gamma;
        if (gamma_.empty()) return BasisTag::tau;
        return BasisTag::mixed;
    }

    /// Insert coefficient * gamma_a. Poles at 0/1 are dropped (the kernel is
    /// identically zero there). Call finalize() after a batch of inserts.
    void add_gamma(Cx a, Cx coeff, const Config& cfg) {
        if (coeff == Cx{}) return;
        if (close(a, Cx{0.0}, cfg.tau_cluster) || close(a, Cx{1.0}, cfg.tau_cluster)) return;
        gamma_.push_back({a, coeff});
    }

    void add_tau(Cx a, Cx coeff, const Config&) {
        if (coeff == Cx{}) return;
        tau_.push_back({a, coeff});
    }

    /// this += s * g (termwise); finalize() afterwards.
    void axpy(Cx s, const SpanFunction& g, const Config& cfg) {
        for (const auto& t : g.gamma_) add_gamma(t.pole, s * t.coeff, cfg);
        for (const auto& t : g.tau_) add_tau(t.pole, s * t.coeff, cfg);
        const_ += s * g.const_;
    }

    void scale(Cx s) {
        for (auto& t : gamma_) t.coeff *= s;
        for (auto& t : tau_) t.coeff *= s;
        const_ *= s;
    }

    /// Sort, merge poles within tau_cluster, purge small coefficients.
    void finalize(const Config& cfg) {
        merge_sorted(gamma_, cfg);
        merge_sorted(tau_, cfg);
        purge(cfg);
    }

    PointValue eval(Cx z) const {
        CompensatedCxSum s;
        for (const auto& t : gamma_) {
            Cx den = z * (z - 1.0) * (z - t.pole);
            if (den == Cx{}) return {Cx{}, true};
            s.add(t.coeff * t.pole * (t.pole - 1.0) / den);
        }
        for (const auto& t : tau_) {
            Cx den = z - t.pole;
            if (den == Cx{}) return {Cx{}, true};
            s.add(t.coeff / den);
        }
        s.add(const_);
        Cx v = s.value();
        if (!is_finite(v)) return {Cx{}, true};
        return {v, false};
    }

    double max_abs_coeff() const {
        double m = std::abs(const_);
        for (const auto& t : gamma_) m = std::max(m, std::abs(t.coeff));
        for (const auto& t : tau_) m = std::max(m, std::abs(t.coeff));
        return m;
    }

    bool matches(const SpanFunction& o, double tol) const {
        if (gamma_.size() != o.gamma_.size() || tau_.size() != o.tau_.size()) return false;
        for (std::size_t i = 0; i < gamma_.size(); ++i)
            if (!close(gamma_[i].pole, o.gamma_[i].pole, tol) ||
                !close(gamma_[i].coeff, o.gamma_[i].coeff, tol))
                return false;
        for (std::size_t i = 0; i < tau_.size(); ++i)
            if (!close(tau_[i].pole, o.tau_[i].pole, tol) ||
                !close(tau_[i].coeff, o.tau_[i].coeff, tol))
                return false;
        return close(const_, o.const_, tol);
    }

private:
    static void merge_sorted(std::vector<Term>& terms, const Config& cfg) {
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
            return lex_less(a.pole, b.pole);
        });
        std::vector<Term> out;
        for (const auto& t : terms) {
            if (!out.empty() && close(out.back().pole, t.pole, cfg.tau_cluster))
                out.back().coeff += t.coeff;
            else
                out.push_back(t);
        }
        terms = std::move(out);
    }

    void purge(const Config& cfg) {
        double cutoff = cfg.tau_drop * max_abs_coeff();
        auto drop = [&](std::vector<Term>& v) {
            v.erase(std::remove_if(v.begin(), v.end(),
                                   [&](const Term& t) { return std::abs(t.coeff) <= cutoff; }),
                    v.end());
        };
        drop(gamma_);
        drop(tau_);
    }

    std::vector<Term> gamma_, tau_;
    Cx const_{};
};

}  // namespace ruelle
