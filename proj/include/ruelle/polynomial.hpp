#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"

namespace ruelle {

/// Dense complex polynomial, coefficients in ascending degree. The zero
/// polynomial is the empty coefficient list with degree() == -1.
class Polynomial {
public:
    Polynomial() = default;

    explicit Polynomial(std::vector<Cx> coeffs) : c_(std::move(coeffs)) {
        for (const Cx& c : c_)
            if (!is_finite(c)) throw Error(errc::malformed_map, "non-finite polynomial coefficient");
        strip_exact_zeros();
    }

    static Polynomial constant(Cx v) {
        if (v == Cx{}) return Polynomial{};
        return Polynomial{{v}};
    }

    static Polynomial identity() { return Polynomial{{Cx{0.0}, Cx{1.0}}}; }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Cx>& coeffs() const { return c_; }
    Cx leading() const { return c_.empty() ? Cx{} : c_.back(); }

    Cx operator[](std::size_t i) const { return i < c_.size() ? c_[i] : Cx{}; }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const Cx& c : c_) m = std::max(m, std::abs(c));
        return m;
    }

    /// Drop leading coefficients below tol relative to the largest one.
    Polynomial trimmed(double tol) const {
        double scale = max_abs_coeff();
        std::vector<Cx> out = c_;
        while (!out.empty() && std::abs(out.back()) <= tol * scale) out.pop_back();
        Polynomial p;
        p.c_ = std::move(out);
        return p;
    }

    Cx eval(Cx z) const {
        Cx r{0.0};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * z + *it;
        return r;
    }

    struct Jet {
        Cx f, f1, f2;
    };

    /// Value and first two derivatives in one Horner pass.
    Jet eval_jet(Cx z) const {
        Cx f{0.0}, f1{0.0}, f2h{0.0};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            f2h = f2h * z + f1;
            f1 = f1 * z + f;
            f = f * z + *it;
        }
        return {f, f1, 2.0 * f2h};
    }

    /// Coefficient sum scale |a_0| + |a_1||z| + ... for residual tests.
    double eval_scale(Cx z) const {
        double az = std::abs(z), pw = 1.0, s = 0.0;
        for (const Cx& c : c_) {
            s += std::abs(c) * pw;
            pw *= az;
        }
        return std::max(s, 1.0);
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return Polynomial{};
        std::vector<Cx> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = double(i) * c_[i];
        return Polynomial{std::move(d)};
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<Cx> out(std::max(a.c_.size(), b.c_.size()), Cx{});
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
        return Polynomial{std::move(out)};
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<Cx> out(std::max(a.c_.size(), b.c_.size()), Cx{});
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
        return Polynomial{std::move(out)};
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial{};
        std::vector<Cx> out(a.c_.size() + b.c_.size() - 1, Cx{});
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
        return Polynomial{std::move(out)};
    }

    friend Polynomial operator*(Cx s, const Polynomial& p) {
        std::vector<Cx> out = p.c_;
        for (Cx& c : out) c *= s;
        return Polynomial{std::move(out)};
    }

    /// this(q): polynomial composition by Horner over polynomial arithmetic.
    Polynomial compose(const Polynomial& q) const {
        Polynomial acc;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it)
            acc = acc * q + Polynomial::constant(*it);
        return acc;
    }

    /// Synthetic division by (z - r); remainder discarded.
    Polynomial deflate(Cx r) const {
        if (c_.size() <= 1) return Polynomial{};
        std::vector<Cx> out(c_.size() - 1, Cx{});
        Cx carry = c_.back();
        for (std::size_t i = c_.size() - 1; i-- > 0;) {
            out[i] = carry;
            carry = c_[i] + r * carry;
        }
        return Polynomial{std::move(out)};
    }

private:
    void strip_exact_zeros() {
        while (!c_.empty() && c_.back() == Cx{}) c_.pop_back();
    }

    std::vector<Cx> c_;
};

}  // namespace ruelle
