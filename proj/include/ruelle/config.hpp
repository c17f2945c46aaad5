#pragma once

#include <cstddef>
#include <cstdint>

#include "ruelle/error.hpp"

namespace ruelle {

/// Single configuration surface for every tolerance and budget. All
/// tolerances are relative (with scale floored at 1). Defaults follow the
/// library-wide reproducibility contract; change them through a config file,
/// not ad hoc per call site.
struct Config {
    // tolerances
    double tau_trim = 1e-10;     // leading-coefficient trim
    double tau_root = 1e-12;     // root residual target / gcd test
    double tau_cluster = 1e-10;  // point-coincidence / merge radius
    double tau_drop = 1e-14;     // span coefficient purge, relative to max
    double tau_resid = 1e-10;    // partial-fraction residue identity
    double tau_comp = 1e-10;     // Mobius/conjugation consistency
    double tau_prod = 1e-10;     // chain-rule product consistency

    // budgets
    std::size_t preimage_node_cap = std::size_t{1} << 20;
    std::size_t orbit_cap = 1 << 16;
    std::size_t span_cap = 1 << 16;

    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
    int threads = 1;

    void validate() const {
        const double tols[] = {tau_trim, tau_root, tau_cluster, tau_drop,
                               tau_resid, tau_comp, tau_prod};
        for (double t : tols)
            if (!(t > 0.0)) throw Error(errc::bad_input, "tolerances must be positive");
        if (preimage_node_cap < 1 || orbit_cap < 1 || span_cap < 1)
            throw Error(errc::bad_input, "budget caps must be >= 1");
        if (threads < 1) throw Error(errc::bad_input, "threads must be >= 1");
    }
};

}  // namespace ruelle
