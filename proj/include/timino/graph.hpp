#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace timino {

/**
 * Causal summary time graph: one node per component series, a directed
 * edge (i, j) meaning series i causes series j through some lagged or
 * instantaneous effect. Self-loops are never stored; autoregressive
 * structure is implicit.
 */
struct SummaryGraph {
    int node_count = 0;
    std::set<std::pair<int, int>> edges;

    SummaryGraph() = default;
    explicit SummaryGraph(int nodes) : node_count(nodes) {}

    /// Throws std::invalid_argument on self-loops or out-of-range endpoints.
    void add_edge(int from, int to);
    bool has_edge(int from, int to) const { return edges.count({from, to}) > 0; }
    int edge_count() const { return static_cast<int>(edges.size()); }
};

/// True iff the edge set contains no directed cycle.
bool is_acyclic(const SummaryGraph& graph);

/// Exact edge-set equality. Throws std::invalid_argument when the two
/// graphs disagree on node_count.
bool graph_equals(const SummaryGraph& a, const SummaryGraph& b);

/// Induced subgraph on `kept` nodes, with nodes renumbered by their rank
/// within `kept` (ascending).
SummaryGraph induced_subgraph(const SummaryGraph& graph, const std::set<int>& kept);

/// Emits a Graphviz digraph. Every node appears (quoted by name), every
/// edge as "from" -> "to";
std::string to_dot(const SummaryGraph& graph, const std::vector<std::string>& names);

/// Parses the digraph format produced by to_dot. Inverse of to_dot:
/// reconstructs node count, names (in declaration order) and edges.
SummaryGraph parse_dot(const std::string& text, std::vector<std::string>* names_out = nullptr);

}  // namespace timino
