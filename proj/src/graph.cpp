#include "timino/graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace timino {

void SummaryGraph::add_edge(int from, int to) {
    if (from == to) throw std::invalid_argument("summary graphs have no self-loops");
    if (from < 0 || from >= node_count || to < 0 || to >= node_count) {
        throw std::invalid_argument("edge endpoint out of range");
    }
    edges.insert({from, to});
}

bool is_acyclic(const SummaryGraph& graph) {
    // Depth-first search with colors: 0 unseen, 1 on stack, 2 done.
    std::vector<int> color(static_cast<size_t>(graph.node_count), 0);
    std::vector<std::vector<int>> adj(static_cast<size_t>(graph.node_count));
    for (const auto& [u, v] : graph.edges) adj[static_cast<size_t>(u)].push_back(v);

    std::function<bool(int)> has_cycle = [&](int u) {
        color[static_cast<size_t>(u)] = 1;
        for (int v : adj[static_cast<size_t>(u)]) {
            if (color[static_cast<size_t>(v)] == 1) return true;
            if (color[static_cast<size_t>(v)] == 0 && has_cycle(v)) return true;
        }
        color[static_cast<size_t>(u)] = 2;
        return false;
    };
    for (int u = 0; u < graph.node_count; ++u) {
        if (color[static_cast<size_t>(u)] == 0 && has_cycle(u)) return false;
    }
    return true;
}

bool graph_equals(const SummaryGraph& a, const SummaryGraph& b) {
    if (a.node_count != b.node_count) {
        throw std::invalid_argument("graph_equals: node_count mismatch");
    }
    return a.edges == b.edges;
}

SummaryGraph induced_subgraph(const SummaryGraph& graph, const std::set<int>& kept) {
    std::map<int, int> renumber;
    int next = 0;
    for (int v : kept) renumber[v] = next++;
    SummaryGraph out(static_cast<int>(kept.size()));
    for (const auto& [u, v] : graph.edges) {
        if (renumber.count(u) && renumber.count(v)) out.add_edge(renumber[u], renumber[v]);
    }
    return out;
}

std::string to_dot(const SummaryGraph& graph, const std::vector<std::string>& names) {
    if (static_cast<int>(names.size()) != graph.node_count) {
        throw std::invalid_argument("to_dot: one name per node required");
    }
    std::ostringstream out;
    out << "digraph summary {\n";
    for (const auto& n : names) out << "  \"" << n << "\";\n";
    for (const auto& [u, v] : graph.edges) {
        out << "  \"" << names[static_cast<size_t>(u)] << "\" -> \""
            << names[static_cast<size_t>(v)] << "\";\n";
    }
    out << "}\n";
    return out.str();
}

namespace {

// Pulls the next "..." token starting at or after pos; returns false when
// none is left on the line.
bool next_quoted(const std::string& line, size_t& pos, std::string& out) {
    const size_t a = line.find('"', pos);
    if (a == std::string::npos) return false;
    const size_t b = line.find('"', a + 1);
    if (b == std::string::npos) throw std::invalid_argument("dot parse: unbalanced quote");
    out = line.substr(a + 1, b - a - 1);
    pos = b + 1;
    return true;
}

}  // namespace

SummaryGraph parse_dot(const std::string& text, std::vector<std::string>* names_out) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> names;
    std::map<std::string, int> index;
    std::vector<std::pair<std::string, std::string>> edge_names;

    auto intern = [&](const std::string& n) {
        auto it = index.find(n);
        if (it != index.end()) return it->second;
        const int id = static_cast<int>(names.size());
        names.push_back(n);
        index[n] = id;
        return id;
    };

    bool saw_digraph = false;
    while (std::getline(in, line)) {
        if (line.find("digraph") != std::string::npos) {
            saw_digraph = true;
            continue;
        }
        if (line.find('}') != std::string::npos) break;
        size_t pos = 0;
        std::string first;
        if (!next_quoted(line, pos, first)) continue;
        if (line.find("->", pos) != std::string::npos) {
            std::string second;
            if (!next_quoted(line, pos, second)) {
                throw std::invalid_argument("dot parse: edge without target");
            }
            edge_names.emplace_back(first, second);
            intern(first);
            intern(second);
        } else {
            intern(first);
        }
    }
    if (!saw_digraph) throw std::invalid_argument("dot parse: not a digraph");

    SummaryGraph g(static_cast<int>(names.size()));
    for (const auto& [a, b] : edge_names) g.add_edge(index[a], index[b]);
    if (names_out) *names_out = names;
    return g;
}

}  // namespace timino
