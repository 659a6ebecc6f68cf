#pragma once

// Spanning-tree decomposition of a circuit graph: incidence matrix over live
// nodes, fundamental-loop matrix over chords and per-chord external-flux
// bookkeeping. Orientation convention: tree branches point away from ground,
// each fundamental loop is oriented along its chord.

#include <algorithm>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcirc/errors.hpp"
#include "qcirc/netlist.hpp"

namespace qcirc {

struct TreeDecomposition {
    std::vector<std::string> tree_branches;
    std::vector<std::string> chord_branches;
    Eigen::MatrixXi incidence;   // N x M, entries -1/0/+1
    Eigen::MatrixXi loop_matrix; // (M-N) x M
    std::map<std::string, double> chord_flux; // chord id -> external flux (Phi0)
    // Effective orientation relative to the declared one (+1 keep, -1 flipped).
    std::map<std::string, int> orientation_sign;
    bool capacitive_tree = false; // tree consists of capacitors only
    // Book-keeping shared with the graph:
    std::vector<std::string> branch_order; // column order of the matrices

    int branch_column(const std::string& id) const {
        for (std::size_t i = 0; i < branch_order.size(); ++i)
            if (branch_order[i] == id) return static_cast<int>(i);
        return -1;
    }

    bool is_chord(const std::string& id) const {
        return std::find(chord_branches.begin(), chord_branches.end(), id) != chord_branches.end();
    }
};

namespace detail {

struct TreeBuild {
    // parent edge index per node (into graph.branches), -1 at ground
    std::map<std::string, int> parent_edge;
    std::map<std::string, std::string> parent_node;
    bool reaches_all = false;
};

// BFS from ground over an edge filter; ties broken by smallest branch id.
template <typename Filter>
TreeBuild grow_tree(const CircuitGraph& g, Filter&& admit) {
    TreeBuild t;
    std::vector<std::string> frontier{CircuitGraph::ground};
    std::map<std::string, bool> visited{{CircuitGraph::ground, true}};

    // adjacency: node -> sorted (branch id, index) pairs for determinism
    std::map<std::string, std::vector<std::pair<std::string, int>>> adj;
    for (std::size_t i = 0; i < g.branches.size(); ++i) {
        const auto& b = g.branches[i];
        if (!admit(b)) continue;
        adj[b.start].emplace_back(b.id, static_cast<int>(i));
        adj[b.finish].emplace_back(b.id, static_cast<int>(i));
    }
    for (auto& [n, v] : adj) std::sort(v.begin(), v.end());

    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& n : frontier) {
            for (const auto& [id, idx] : adj[n]) {
                const auto& b = g.branches[idx];
                const std::string other = (b.start == n) ? b.finish : b.start;
                if (visited.count(other)) continue;
                visited[other] = true;
                t.parent_edge[other] = idx;
                t.parent_node[other] = n;
                next.push_back(other);
            }
        }
        frontier = std::move(next);
    }
    t.reaches_all = true;
    for (const auto& n : g.nodes)
        if (!visited.count(n)) t.reaches_all = false;
    return t;
}

} // namespace detail

/// Build a spanning tree and the incidence/loop matrices. When
/// prefer_capacitive is set and a capacitive spanning tree exists, the tree
/// uses only capacitor branches; otherwise capacitors are still preferred
/// and the capacitive_tree flag reports whether a purely capacitive tree
/// was achieved. Branches carrying a flux tag are kept off the tree when
/// possible so that their loops carry the external flux.
inline TreeDecomposition decompose(const CircuitGraph& g, bool prefer_capacitive = true) {
    const int n_live = static_cast<int>(g.nodes.size());
    const int n_branch = static_cast<int>(g.branches.size());

    // Stage 1: capacitive branches only (untagged first).
    auto cap_untagged = [](const Branch& b) {
        return b.kind == BranchKind::capacitor && !b.flux_tag;
    };
    auto cap_any = [](const Branch& b) { return b.kind == BranchKind::capacitor; };
    auto untagged = [](const Branch& b) { return !b.flux_tag; };
    auto any = [](const Branch&) { return true; };

    detail::TreeBuild build;
    bool capacitive = false;
    if (prefer_capacitive) {
        build = detail::grow_tree(g, cap_untagged);
        if (build.reaches_all) capacitive = true;
        if (!capacitive) {
            build = detail::grow_tree(g, cap_any);
            if (build.reaches_all) capacitive = true;
        }
    }
    if (!capacitive) {
        build = detail::grow_tree(g, untagged);
        if (!build.reaches_all) build = detail::grow_tree(g, any);
        if (!build.reaches_all)
            throw Error(ErrorCode::Disconnected, "circuit graph is not connected");
    }

    TreeDecomposition t;
    t.capacitive_tree = capacitive;
    for (const auto& b : g.branches) t.branch_order.push_back(b.id);

    std::vector<bool> in_tree(n_branch, false);
    for (const auto& [node, edge] : build.parent_edge) in_tree[edge] = true;

    // Tree depth from ground, for path walking.
    std::map<std::string, int> depth{{CircuitGraph::ground, 0}};
    {
        bool progress = true;
        while (progress) {
            progress = false;
            for (const auto& [node, pnode] : build.parent_node) {
                if (depth.count(node)) continue;
                auto it = depth.find(pnode);
                if (it != depth.end()) {
                    depth[node] = it->second + 1;
                    progress = true;
                }
            }
        }
    }

    // Effective orientations: tree branches away from ground (child = head),
    // chords keep their declared orientation.
    std::map<std::string, std::pair<std::string, std::string>> eff; // id -> (tail, head)
    for (int i = 0; i < n_branch; ++i) {
        const auto& b = g.branches[i];
        if (in_tree[i]) {
            // the child node is the one whose parent edge this is
            std::string child;
            for (const auto& [node, edge] : build.parent_edge)
                if (edge == i) child = node;
            const std::string parent = build.parent_node[child];
            eff[b.id] = {parent, child};
            t.orientation_sign[b.id] = (b.start == parent && b.finish == child) ? +1 : -1;
            t.tree_branches.push_back(b.id);
        } else {
            eff[b.id] = {b.start, b.finish};
            t.orientation_sign[b.id] = +1;
            t.chord_branches.push_back(b.id);
        }
    }

    // Incidence matrix over live nodes with effective orientations.
    t.incidence = Eigen::MatrixXi::Zero(n_live, n_branch);
    for (int j = 0; j < n_branch; ++j) {
        const auto& [tail, head] = eff[g.branches[j].id];
        const int it_ = g.node_index(tail);
        const int ih = g.node_index(head);
        if (it_ >= 0) t.incidence(it_, j) = +1; // arrow leaves tail
        if (ih >= 0) t.incidence(ih, j) = -1;   // arrow enters head
    }

    // Fundamental loops: chord + tree path from chord head back to chord tail.
    const int n_loops = n_branch - n_live;
    t.loop_matrix = Eigen::MatrixXi::Zero(std::max(n_loops, 0), n_branch);
    int row = 0;
    for (const auto& chord_id : t.chord_branches) {
        const int jc = t.branch_column(chord_id);
        t.loop_matrix(row, jc) = +1; // loop oriented along the chord
        // walk both endpoints up to their common ancestor in the tree
        auto [tail, head] = eff[chord_id];
        std::string a = head, b = tail;
        std::vector<std::pair<int, int>> path; // (branch index, sign in loop)
        auto step_up = [&](std::string& n, int sign) {
            const int edge = build.parent_edge[n];
            // tree edge points parent -> child = toward n
            path.emplace_back(edge, sign);
            n = build.parent_node[n];
        };
        int da = g.is_ground(a) ? 0 : depth[a];
        int db = g.is_ground(b) ? 0 : depth[b];
        while (da > db) { step_up(a, +1); --da; }   // traversing child -> parent, against edge
        while (db > da) { step_up(b, -1); --db; }
        while (a != b) { step_up(a, +1); --da; step_up(b, -1); --db; }
        // The loop runs tail -> head through the chord and returns head ->
        // tail through the tree. Tree edges point parent -> child, so steps
        // up from the head traverse against the arrow (coefficient -1) and
        // steps up from the tail are traversed with the arrow by the loop
        // (coefficient +1).
        for (const auto& [edge, sign] : path)
            t.loop_matrix(row, edge) = (sign > 0) ? -1 : +1;
        ++row;
    }

    if (n_loops > 0) {
        Eigen::MatrixXi prod = t.incidence * t.loop_matrix.transpose();
        if (prod.cwiseAbs().maxCoeff() != 0)
            throw Error(ErrorCode::Disconnected, "internal error: loop matrix not orthogonal");
    }

    // External fluxes: one tag maps to exactly one fundamental loop.
    std::map<std::string, int> tag_use;
    for (const auto& b : g.branches)
        if (b.flux_tag) ++tag_use[*b.flux_tag];
    for (const auto& [tag, count] : tag_use)
        if (count > 1)
            throw Error(ErrorCode::AmbiguousLoopTag,
                        "flux tag '" + tag + "' appears on " + std::to_string(count) + " branches");
    for (const auto& b : g.branches) {
        if (!b.flux_tag) continue;
        if (!t.is_chord(b.id))
            throw Error(ErrorCode::AmbiguousLoopTag,
                        "flux tag '" + *b.flux_tag + "' sits on tree branch '" + b.id +
                            "', so it closes no fundamental loop");
    }
    return t;
}

/// Attach external flux values to the chords that close tagged loops.
/// Untagged chords get zero. Each chord then carries
/// flux = phi(head) - phi(tail) + flux_ext in its branch-flux bookkeeping.
inline TreeDecomposition assign_chord_fluxes(TreeDecomposition t, const CircuitGraph& g) {
    t.chord_flux.clear();
    for (const auto& id : t.chord_branches) {
        const Branch* b = g.find_branch(id);
        double flux = 0.0;
        if (b && b->flux_tag) flux = g.flux_of_tag(*b->flux_tag);
        t.chord_flux[id] = flux;
    }
    return t;
}

} // namespace qcirc
