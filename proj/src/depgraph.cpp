#include "ppc450/depgraph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace ppc450 {

std::string_view dep_kind_name(DepKind kind) {
    switch (kind) {
        case DepKind::RAW: return "RAW";
        case DepKind::WAR: return "WAR";
        case DepKind::WAW: return "WAW";
    }
    return "?";
}

DependencyGraph::DependencyGraph(int node_count) : succ_(node_count), pred_(node_count) {
    ids.resize(node_count);
    for (int i = 0; i < node_count; ++i) ids[i] = i;
}

void DependencyGraph::add_edge(int from, int to, int weight, DepKind kind) {
    if (from < 0 || to < 0 || from >= size() || to >= size() || from == to)
        throw std::invalid_argument("edge endpoints out of range");
    for (int e : succ_[from]) {
        DepEdge& existing = edges_[e];
        if (existing.to != to) continue;
        if (weight > existing.weight || (weight == existing.weight && kind < existing.kind)) {
            existing.weight = weight;
            existing.kind = kind;
        }
        return;
    }
    edges_.push_back({from, to, weight, kind});
    int index = static_cast<int>(edges_.size()) - 1;
    succ_[from].push_back(index);
    pred_[to].push_back(index);
}

int DependencyGraph::weight(int from, int to) const {
    for (int e : succ_[from])
        if (edges_[e].to == to) return edges_[e].weight;
    return -1;
}

std::string DependencyGraph::to_edge_list() const {
    std::ostringstream os;
    for (const auto& e : edges_) os << ids[e.from] << ' ' << ids[e.to] << ' ' << e.weight << ' ' << dep_kind_name(e.kind) << '\n';
    return os.str();
}

namespace {

bool may_alias(const Instruction& x, const Instruction& y) {
    return x.stream < 0 || y.stream < 0 || x.stream == y.stream;
}

}  // namespace

DependencyGraph build_dag(std::span<const Instruction> block, const MachineConfig& config) {
    const int n = static_cast<int>(block.size());
    DependencyGraph dag(n);
    for (int i = 0; i < n; ++i) dag.ids[i] = block[i].id;

    std::vector<std::vector<RegRef>> w(n), r(n);
    for (int i = 0; i < n; ++i) {
        w[i] = writes_of(block[i]);
        r[i] = reads_of(block[i]);
    }
    auto contains = [](const std::vector<RegRef>& set, const RegRef& x) {
        return std::find(set.begin(), set.end(), x) != set.end();
    };

    // Register hazards link each access to the nearest conflicting accesses
    // only; farther ones are implied through WAW chains. A partial write does
    // not end a value, so RAW search continues past it.
    for (int j = 0; j < n; ++j) {
        for (const auto& reg : r[j])
            for (int i = j - 1; i >= 0; --i) {
                if (!contains(w[i], reg)) continue;
                dag.add_edge(i, j, instruction_resource(block[i].op, config).latency, DepKind::RAW);
                if (!is_partial_write(block[i].op)) break;
            }
        for (const auto& reg : w[j])
            for (int i = j - 1; i >= 0; --i) {
                if (contains(w[i], reg)) {
                    dag.add_edge(i, j, 1, DepKind::WAW);
                    break;
                }
                if (contains(r[i], reg)) dag.add_edge(i, j, 1, DepKind::WAR);
            }
        for (int i = 0; i < j; ++i) {
            const Opcode a = block[i].op, b = block[j].op;
            if (is_memory(a) && is_memory(b) && !(is_load(a) && is_load(b)) && may_alias(block[i], block[j])) {
                DepKind kind = a == Opcode::STQ ? (b == Opcode::STQ ? DepKind::WAW : DepKind::RAW) : DepKind::WAR;
                dag.add_edge(i, j, 1, kind);
            }
        }
    }
    return dag;
}

namespace {

std::vector<int> topological_order(const DependencyGraph& dag) {
    const int n = dag.size();
    std::vector<int> indegree(n, 0);
    for (const auto& e : dag.edges()) ++indegree[e.to];
    std::vector<int> order;
    order.reserve(n);
    std::queue<int> ready;
    for (int v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push(v);
    while (!ready.empty()) {
        int v = ready.front();
        ready.pop();
        order.push_back(v);
        for (int e : dag.successors(v))
            if (--indegree[dag.edge(e).to] == 0) ready.push(dag.edge(e).to);
    }
    if (static_cast<int>(order.size()) != n) throw std::invalid_argument("malformed dag: cycle detected");
    return order;
}

}  // namespace

std::vector<int> tail_lengths(const DependencyGraph& dag) {
    auto order = topological_order(dag);
    std::vector<int> tail(dag.size(), 1);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (int e : dag.successors(*it)) {
            const auto& edge = dag.edge(e);
            tail[*it] = std::max(tail[*it], edge.weight + tail[edge.to]);
        }
    return tail;
}

int critical_path(const DependencyGraph& dag) {
    if (dag.size() == 0) return 0;
    auto tail = tail_lengths(dag);
    return *std::max_element(tail.begin(), tail.end());
}

int lower_bound(const DependencyGraph& dag, std::span<const Instruction> block, const MachineConfig& config) {
    int lsu = 0, fpu = 0;
    for (const auto& in : block) {
        if (unit_of(in.op) == Unit::LSU) ++lsu;
        if (unit_of(in.op) == Unit::FPU) ++fpu;
    }
    return std::max({critical_path(dag), config.lsu_occupancy * lsu, fpu});
}

}  // namespace ppc450
