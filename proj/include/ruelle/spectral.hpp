#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
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

/// Forward orbits of all critical points, when every one of them is
/// eventually periodic within the budget. The basis set S excludes points
/// within tau_cluster of {0, 1} (where the gamma kernel vanishes) and the
/// point at infinity.
struct PostcriticalSet {
    bool finite = false;
    std::vector<Cx> basis;                // sorted by (re, im)
    std::vector<std::vector<Cx>> orbits;  // per critical point, as explored
};

inline PostcriticalSet postcritical_set(const RationalMap& map, int budget, const Config& cfg) {
    if (budget < 1) throw Error(errc::bad_input, "budget must be >= 1");
    PostcriticalSet out;
    std::vector<Cx> collected;

    for (const auto& cp : map.critical_points()) {
        std::vector<Cx> pts;
        if (cp.value_infinite) {
            // orbit enters the fixed point at infinity immediately
            if (!map.fixes_infinity()) return out;
            out.orbits.push_back({cp.point});
            collected.push_back(cp.point);
            continue;
        }
        Cx z = cp.point;
        bool periodic = false;
        for (int step = 0; step <= budget; ++step) {
            for (const Cx& prev : pts)
                if (close(prev, z, cfg.tau_cluster)) {
                    periodic = true;
                    break;
                }
            if (periodic) break;
            pts.push_back(z);
            MapJet jet = map.eval(z, 0);
            if (jet.pole) {
                // lands on infinity; periodic there iff infinity is fixed
                periodic = map.fixes_infinity();
                break;
            }
            if (!is_finite(jet.value) || std::abs(jet.value) > kOverflowGuard) break;
            z = jet.value;
        }
        if (!periodic) return out;  // not finite within budget
        out.orbits.push_back(pts);
        collected.insert(collected.end(), pts.begin(), pts.end());
    }

    std::sort(collected.begin(), collected.end(), lex_less);
    for (const Cx& p : collected) {
        if (close(p, Cx{0.0}, cfg.tau_cluster) || close(p, Cx{1.0}, cfg.tau_cluster)) continue;
        if (!out.basis.empty() && close(out.basis.back(), p, cfg.tau_cluster)) continue;
        out.basis.push_back(p);
    }
    out.finite = true;
    return out;
}

/// Dense matrix of the pushforward on span{gamma_a : a in basis}; column j
/// holds the coefficients of the image of gamma_{basis[j]} in the basis.
struct TransferMatrix {
    std::vector<Cx> basis;
    std::vector<Cx> entries;  // row-major, size n*n

    std::size_t size() const { return basis.size(); }
    Cx at(std::size_t row, std::size_t col) const { return entries[row * basis.size() + col]; }
    Cx& at(std::size_t row, std::size_t col) { return entries[row * basis.size() + col]; }

    double frobenius_norm() const {
        double s = 0.0;
        for (const Cx& e : entries) s += std::norm(e);
        return std::sqrt(s);
    }
};

inline TransferMatrix transfer_matrix(const RationalMap& map, const std::vector<Cx>& basis,
                                      const Config& cfg) {
    map.require_normalized(cfg);
    map.require_simple_critical();
    const std::size_t n = basis.size();
    TransferMatrix M;
    M.basis = basis;
    M.entries.assign(n * n, Cx{});

    for (std::size_t j = 0; j < n; ++j) {
        SpanFunction image = span_pushforward(map, SpanFunction::gamma(basis[j], Cx{1.0}, cfg), cfg);
        double scale = std::max(1.0, image.max_abs_coeff());
        for (const auto& term : image.gamma_terms()) {
            std::size_t row = n;
            for (std::size_t i = 0; i < n; ++i)
                if (close(term.pole, basis[i], cfg.tau_cluster)) {
                    row = i;
                    break;
                }
            if (row == n) {
                if (std::abs(term.coeff) <= cfg.tau_drop * scale) continue;
                throw Error(errc::closure_violation,
                            "pushforward image leaves the basis span");
            }
            M.at(row, j) += term.coeff;
        }
        if (!image.tau_terms().empty())
            throw Error(errc::closure_violation, "tau component in a gamma image");
    }
    return M;
}

/// All eigenvalues of the transfer matrix (dense solver), each verified
/// against the residual bound ||Mv - lambda v|| <= 1e-8 ||M||_F. Returned
/// sorted by (re, im).
inline std::vector<Cx> spectrum(const TransferMatrix& M) {
    const std::size_t n = M.size();
    if (n == 0) return {};

    Eigen::MatrixXcd A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = M.at(i, j);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(A, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw Error(errc::root_failure, "eigenvalue iteration failed to converge");

    double norm = std::max(M.frobenius_norm(), 1e-300);
    std::vector<Cx> values;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
        Cx lambda = solver.eigenvalues()(k);
        Eigen::VectorXcd v = solver.eigenvectors().col(k);
        double resid = (A * v - lambda * v).norm() / std::max(v.norm(), 1e-300);
        if (resid > 1e-8 * norm)
            throw Error(errc::root_failure, "eigenpair residual exceeds the contract bound");
        values.push_back(lambda);
    }
    std::sort(values.begin(), values.end(), lex_less);
    return values;
}

}  // namespace ruelle
