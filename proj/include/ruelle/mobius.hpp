#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/polynomial.hpp"
#include "ruelle/rational_map.hpp"

namespace ruelle {

/// Mobius transformation z -> (az + b)/(cz + d), determinant normalized to 1.
struct Mobius {
    Cx a{1.0}, b{}, c{}, d{1.0};

    static Mobius identity() { return {}; }

    static Mobius from_entries(Cx a, Cx b, Cx c, Cx d) {
        Cx det = a * d - b * c;
        if (det == Cx{}) throw Error(errc::bad_input, "singular Mobius matrix");
        Cx s = 1.0 / std::sqrt(det);
        return {a * s, b * s, c * s, d * s};
    }

    /// The transformation sending (f0, f1, finf) to (0, 1, inf); the three
    /// points must be pairwise distinct on the sphere.
    static Mobius to_zero_one_inf(const SpherePoint& f0, const SpherePoint& f1,
                                  const SpherePoint& finf) {
        if (!f0.infinite && !f1.infinite && !finf.infinite) {
            Cx p = f0.value, q = f1.value, r = finf.value;
            return from_entries(q - r, -p * (q - r), q - p, -r * (q - p));
        }
        if (finf.infinite)
            return from_entries(Cx{1.0}, -f0.value, Cx{}, f1.value - f0.value);
        if (f0.infinite)
            return from_entries(Cx{}, f1.value - finf.value, Cx{1.0}, -finf.value);
        // f1 infinite
        return from_entries(Cx{1.0}, -f0.value, Cx{1.0}, -finf.value);
    }

    SpherePoint apply(const SpherePoint& z) const {
        if (z.infinite) {
            if (c == Cx{}) return SpherePoint::at_infinity();
            return SpherePoint::finite(a / c);
        }
        Cx den = c * z.value + d;
        if (den == Cx{}) return SpherePoint::at_infinity();
        return SpherePoint::finite((a * z.value + b) / den);
    }

    Cx apply_finite(Cx z) const {
        Cx den = c * z + d;
        return (a * z + b) / den;
    }

    Mobius inverse() const { return {d, -b, -c, a}; }

    Mobius compose(const Mobius& o) const {  // this after o
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

namespace detail {

/// Powers U^k V^(D-k) for the numerator of a polynomial composed with a
/// Mobius argument: P((Uw+..)/(Vw+..)) * V^D = sum p_k U^k V^(D-k).
inline Polynomial mobius_compose_numerator(const Polynomial& p, const Polynomial& u,
                                           const Polynomial& v, int total_degree) {
    std::vector<Polynomial> upow(total_degree + 1), vpow(total_degree + 1);
    upow[0] = Polynomial::constant(Cx{1.0});
    vpow[0] = Polynomial::constant(Cx{1.0});
    for (int k = 1; k <= total_degree; ++k) {
        upow[k] = upow[k - 1] * u;
        vpow[k] = vpow[k - 1] * v;
    }
    Polynomial acc;
    for (int k = 0; k <= total_degree; ++k) {
        Cx pk = p[static_cast<std::size_t>(k)];
        if (pk == Cx{}) continue;
        acc = acc + pk * (upow[k] * vpow[total_degree - k]);
    }
    return acc;
}

}  // namespace detail

/// Conjugate `map` by the Mobius transformation m sending three of its fixed
/// points (f0, f1, finf) to (0, 1, inf). Returns the conjugated map
/// m . R . m^{-1} together with m. The result is canonicalized: monic
/// denominator (constant 1 for polynomial results).
inline std::pair<RationalMap, Mobius> normalize_fixed(const RationalMap& map,
                                                      const SpherePoint& f0,
                                                      const SpherePoint& f1,
                                                      const SpherePoint& finf,
                                                      const Config& cfg) {
    const SpherePoint pts[3] = {f0, f1, finf};
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (pts[i].close_to(pts[j], cfg.tau_cluster))
                throw Error(errc::normalization, "fixed points must be pairwise distinct");
    for (const auto& p : pts) {
        SpherePoint image = map.apply(p);
        if (!image.close_to(p, cfg.tau_comp))
            throw Error(errc::normalization, "point is not fixed by the map");
    }

    Mobius m = Mobius::to_zero_one_inf(f0, f1, finf);
    Mobius mi = m.inverse();

    const int deg = map.degree();
    // m^{-1}(w) = (mi.a w + mi.b) / (mi.c w + mi.d)
    Polynomial u{{mi.b, mi.a}};
    Polynomial v{{mi.d, mi.c}};

    Polynomial np = detail::mobius_compose_numerator(map.numerator(), u, v, deg);
    Polynomial nq = detail::mobius_compose_numerator(map.denominator(), u, v, deg);

    Polynomial new_num = (m.a * np + m.b * nq).trimmed(cfg.tau_trim);
    Polynomial new_den = (m.c * np + m.d * nq).trimmed(cfg.tau_trim);

    // cancel any common roots introduced by the algebra
    if (new_den.degree() >= 1) {
        for (const auto& cl : find_roots(new_den, cfg)) {
            while (new_den.degree() >= 1 &&
                   std::abs(new_num.eval(cl.point)) <=
                       1e3 * cfg.tau_root * new_num.eval_scale(cl.point) &&
                   std::abs(new_den.eval(cl.point)) <=
                       1e3 * cfg.tau_root * new_den.eval_scale(cl.point)) {
                new_num = new_num.deflate(cl.point).trimmed(cfg.tau_trim);
                new_den = new_den.deflate(cl.point).trimmed(cfg.tau_trim);
            }
        }
    }

    if (new_den.is_zero()) throw Error(errc::normalization, "conjugation produced a zero denominator");
    Cx lead = new_den.leading();
    new_num = (1.0 / lead) * new_num;
    new_den = (1.0 / lead) * new_den;

    RationalMap out(new_num, new_den, cfg);
    if (out.degree() != deg)
        throw Error(errc::normalization, "conjugation changed the degree");

    // sampled conjugation identity m(R(z)) = Q(m(z))
    Cx z{0.321, 0.117};
    for (int k = 0; k < 8; ++k) {
        z = z * Cx{1.37, 0.21} + Cx{0.11, -0.07};
        SpherePoint lhs = m.apply(map.apply(SpherePoint::finite(z)));
        SpherePoint rhs = out.apply(m.apply(SpherePoint::finite(z)));
        if (!lhs.infinite && !rhs.infinite &&
            !close(lhs.value, rhs.value, 1e4 * cfg.tau_comp))
            throw Error(errc::normalization, "conjugated map failed the sampling check");
    }
    return {out, m};
}

}  // namespace ruelle
