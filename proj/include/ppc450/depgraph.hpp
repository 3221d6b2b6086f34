#pragma once

#include <span>
#include <string>
#include <vector>

#include "ppc450/isa.hpp"

namespace ppc450 {

enum class DepKind : std::uint8_t { RAW, WAR, WAW };

std::string_view dep_kind_name(DepKind kind);

struct DepEdge {
    int from;  // block position of the earlier instruction
    int to;
    int weight;
    DepKind kind;

    bool operator==(const DepEdge&) const = default;
};

/// Weighted dependency DAG over the positions of a block. Nodes are block
/// positions 0..n-1; `ids` maps them back to instruction ids.
class DependencyGraph {
public:
    DependencyGraph() = default;
    explicit DependencyGraph(int node_count);

    int size() const { return static_cast<int>(succ_.size()); }
    std::span<const DepEdge> edges() const { return edges_; }
    const std::vector<int>& successors(int node) const { return succ_[node]; }
    const std::vector<int>& predecessors(int node) const { return pred_[node]; }
    const DepEdge& edge(int index) const { return edges_[index]; }

    // Adds an edge, merging with an existing (from, to) pair by keeping the
    // larger weight. Edges must point forward (from < to).
    void add_edge(int from, int to, int weight, DepKind kind);

    // Edge weight between two nodes, or -1 when unconnected.
    int weight(int from, int to) const;

    // `i j weight kind` per line.
    std::string to_edge_list() const;

    std::vector<int> ids;

private:
    std::vector<DepEdge> edges_;
    std::vector<std::vector<int>> succ_;  // edge indices
    std::vector<std::vector<int>> pred_;
};

// Register hazards (RAW, WAR, WAW) against the nearest conflicting accesses;
// memory ordering edges (weight 1) between loads/stores that may alias.
// Live-in registers need no producer.
DependencyGraph build_dag(std::span<const Instruction> block, const MachineConfig& config = {});

// Longest path (sum of edge weights) plus one issue slot for the final node.
// Throws std::invalid_argument on a cyclic graph.
int critical_path(const DependencyGraph& dag);

// For every node, the longest weighted path from it to any sink plus one.
std::vector<int> tail_lengths(const DependencyGraph& dag);

// max{critical path, 2 * |LSU|, |FPU|}
int lower_bound(const DependencyGraph& dag, std::span<const Instruction> block,
                const MachineConfig& config = {});

}  // namespace ppc450
