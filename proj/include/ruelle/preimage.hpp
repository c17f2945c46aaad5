#pragma once

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "ruelle/config.hpp"
#include "ruelle/error.hpp"
#include "ruelle/numeric.hpp"
#include "ruelle/rational_map.hpp"
#include "ruelle/roots.hpp"

namespace ruelle {

struct PreimageNode {
    Cx point{};
    int parent = -1;        // index into the previous level
    Cx branch_deriv{1.0};   // R'(point)
    Cx path_deriv{1.0};     // (R^k)'(point) along the path to the root
    int multiplicity = 1;
    bool critical_collision = false;
};

/// The depth-k tree of R^{-k}(w). Level j holds the solutions of R^j(y) = w
/// counted with multiplicity; node order within a level is sorted by
/// (re, im) with ties broken by parent index, so sums over a level are
/// reproducible independent of thread count.
class PreimageTree {
public:
    PreimageTree(const RationalMap& map, Cx w, int depth, const Config& cfg) : root_(w) {
        if (depth < 0) throw Error(errc::bad_input, "negative preimage depth");
        double projected = 1.0;
        for (int j = 0; j < depth; ++j) {
            projected *= map.degree();
            if (projected > double(cfg.preimage_node_cap))
                throw Error(errc::budget, "preimage tree exceeds node budget");
        }

        levels_.resize(depth + 1);
        levels_[0].push_back(PreimageNode{w, -1, Cx{1.0}, Cx{1.0}, 1, false});

        for (int j = 1; j <= depth; ++j) {
            const auto& parents = levels_[j - 1];
            std::vector<std::vector<PreimageNode>> per_parent(parents.size());

            auto expand = [&](std::size_t begin, std::size_t end) {
                for (std::size_t pi = begin; pi < end; ++pi)
                    per_parent[pi] = expand_parent(map, parents[pi], static_cast<int>(pi), cfg);
            };

            if (cfg.threads > 1 && parents.size() >= 64) {
                std::size_t nthreads = std::min<std::size_t>(cfg.threads, parents.size());
                std::vector<std::thread> pool;
                std::size_t chunk = (parents.size() + nthreads - 1) / nthreads;
                for (std::size_t t = 0; t < nthreads; ++t) {
                    std::size_t b = t * chunk, e = std::min(parents.size(), b + chunk);
                    if (b < e) pool.emplace_back(expand, b, e);
                }
                for (auto& th : pool) th.join();
            } else {
                expand(0, parents.size());
            }

            auto& level = levels_[j];
            for (auto& block : per_parent)
                level.insert(level.end(), block.begin(), block.end());
            std::stable_sort(level.begin(), level.end(),
                             [](const PreimageNode& a, const PreimageNode& b) {
                                 if (a.point.real() != b.point.real())
                                     return a.point.real() < b.point.real();
                                 if (a.point.imag() != b.point.imag())
                                     return a.point.imag() < b.point.imag();
                                 return a.parent < b.parent;
                             });
        }
    }

    Cx root() const { return root_; }
    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    const std::vector<PreimageNode>& level(int j) const { return levels_[j]; }
    const std::vector<std::vector<PreimageNode>>& levels() const { return levels_; }

    bool level_has_collision(int j) const {
        for (const auto& n : levels_[j])
            if (n.critical_collision) return true;
        return false;
    }

    /// Nodes at level j counted with multiplicity (= degree^j when complete).
    long node_count_with_multiplicity(int j) const {
        long s = 0;
        for (const auto& n : levels_[j]) s += n.multiplicity;
        return s;
    }

private:
    std::vector<PreimageNode> expand_parent(const RationalMap& map, const PreimageNode& parent,
                                            int parent_index, const Config& cfg) {
        // solutions of R(y) = parent: roots of P - w Q
        Polynomial eq = map.numerator() - parent.point * map.denominator();
        std::vector<PreimageNode> out;
        for (const auto& cl : find_roots(eq, cfg)) {
            PreimageNode node;
            node.point = cl.point;
            node.parent = parent_index;
            node.multiplicity = parent.multiplicity * cl.multiplicity;
            MapJet jet = map.eval(cl.point, 1);
            node.branch_deriv = jet.pole ? Cx{} : jet.d1;
            node.critical_collision =
                cl.multiplicity > 1 || parent.critical_collision || near_critical(map, cl.point, cfg);
            node.path_deriv = parent.path_deriv * node.branch_deriv;
            out.push_back(node);
        }
        return out;
    }

    static bool near_critical(const RationalMap& map, Cx z, const Config& cfg) {
        for (const auto& cp : map.critical_points())
            if (close(z, cp.point, cfg.tau_cluster)) return true;
        return false;
    }

    Cx root_;
    std::vector<std::vector<PreimageNode>> levels_;
};

}  // namespace ruelle
