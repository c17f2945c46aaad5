#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace ruelle {

using Cx = std::complex<double>;

inline constexpr double kOverflowGuard = 1e150;

/// Lexicographic order (real part, then imaginary part). Used everywhere a
/// deterministic ordering of complex points is required.
inline bool lex_less(const Cx& a, const Cx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

inline bool is_finite(const Cx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Relative closeness with floor 1 on the scale, so tolerances behave
/// uniformly near the origin.
inline bool close(const Cx& a, const Cx& b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// A point on the Riemann sphere: a finite complex value or the explicit
/// marker for infinity.
struct SpherePoint {
    Cx value{0.0, 0.0};
    bool infinite = false;

    static SpherePoint at_infinity() { return SpherePoint{Cx{}, true}; }
    static SpherePoint finite(Cx z) { return SpherePoint{z, false}; }

    bool close_to(const SpherePoint& o, double tol) const {
        if (infinite || o.infinite) return infinite == o.infinite;
        return close(value, o.value, tol);
    }
};

/// Neumaier compensated accumulation. Addition order is the caller's
/// responsibility; combined with the deterministic node orderings this makes
/// large preimage sums reproducible bit-for-bit.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CompensatedCxSum {
public:
    void add(const Cx& z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    Cx value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_, im_;
};

}  // namespace ruelle
