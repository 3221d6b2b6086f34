// Independent oracles used by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <vector>

#include "ppc450/depgraph.hpp"
#include "ppc450/isa.hpp"
#include "ppc450/random.hpp"
#include "ppc450/stencil.hpp"

namespace oracle {

using namespace ppc450;

inline Instruction make(int id, Opcode op, int dst, int a, int b, int stream = -1, int imm = 0) {
    Instruction in;
    in.id = id;
    in.op = op;
    in.dst = static_cast<std::uint8_t>(dst);
    in.a = static_cast<std::uint8_t>(a);
    in.b = static_cast<std::uint8_t>(b);
    in.imm = imm;
    in.stream = stream;
    return in;
}

// The eight-instruction example block: two loads, a subtract, a reload of
// fb, two multiplies and two stores. fa=f1 fb=f2 fc=f3 fd=f4 fe=f5;
// rx=r1 ry=r0 rt=r3 rz=r4 rv=r5. Stream ids 0,0,1,2,3.
inline Program example_block() {
    return {
        make(1, Opcode::LDQ, 1, 1, 0, 0),
        make(2, Opcode::LDQ, 2, 1, 0, 0),
        make(3, Opcode::FMUL_CP, 4, 1, 2),
        make(4, Opcode::LDQ, 2, 3, 0, 1),
        make(5, Opcode::FMUL_CP, 5, 2, 4),
        make(6, Opcode::STQ, 5, 4, 0, 2),
        make(7, Opcode::FMUL_CP, 3, 4, 3),
        make(8, Opcode::STQ, 3, 5, 0, 3),
    };
}

// Longest weighted path + 1 by enumerating every path from every node.
inline int enumerate_critical_path(const DependencyGraph& dag) {
    std::function<int(int)> walk = [&](int v) {
        int best = 1;
        for (int e : dag.successors(v)) best = std::max(best, dag.edge(e).weight + walk(dag.edge(e).to));
        return best;
    };
    int best = 0;
    for (int v = 0; v < dag.size(); ++v) best = std::max(best, walk(v));
    return best;
}

// Minimum schedule length over every legal cycle-by-cycle issue sequence,
// including idle cycles. Legality: one FPU issue per cycle; one slot-B (LSU
// or IU) issue per cycle, and none while an earlier slot-B op is still
// occupying it; cycle(j) >= cycle(i) + w for every edge. Length is
// max(cycle + occupancy - 1). Memoized on (issued set, saturated ages).
class BruteForce {
public:
    BruteForce(std::span<const Instruction> block, const MachineConfig& config)
        : n_(static_cast<int>(block.size())), dag_(build_dag(block, config)) {
        for (const auto& in : block) {
            auto r = instruction_resource(in.op, config);
            fpu_.push_back(r.unit == Unit::FPU);
            occ_.push_back(r.occupancy);
        }
        for (int v = 0; v < n_; ++v)
            for (int e : dag_.successors(v)) cap_ = std::max(cap_, dag_.edge(e).weight);
        for (int o : occ_) cap_ = std::max(cap_, o);
    }

    int minimum() {
        if (n_ == 0) return 0;
        std::vector<int> age(n_, -1);  // -1 = not issued
        return best(age);
    }

private:
    // Cycles from the current one (inclusive) to the end of the schedule.
    int best(std::vector<int>& age) {
        auto it = memo_.find(age);
        if (it != memo_.end()) return it->second;

        bool done = true;
        for (int a : age) done &= a >= 0;
        if (done) {
            int tail = 0;
            for (int v = 0; v < n_; ++v) tail = std::max(tail, occ_[v] - age[v]);
            return memo_[age] = std::max(tail, 0);
        }

        bool slot_b_busy = false;
        for (int v = 0; v < n_; ++v)
            if (age[v] >= 0 && !fpu_[v] && age[v] < occ_[v]) slot_b_busy = true;

        std::vector<int> fpu_ready{-1}, b_ready{-1};
        for (int v = 0; v < n_; ++v) {
            if (age[v] >= 0) continue;
            bool ok = true;
            for (int e : dag_.predecessors(v)) {
                int p = dag_.edge(e).from;
                if (age[p] < dag_.edge(e).weight) ok = false;
            }
            if (!ok) continue;
            if (fpu_[v]) fpu_ready.push_back(v);
            else if (!slot_b_busy) b_ready.push_back(v);
        }

        int result = 1 << 20;
        for (int f : fpu_ready)
            for (int b : b_ready) {
                std::vector<int> next = age;
                if (f >= 0) next[f] = 0;
                if (b >= 0) next[b] = 0;
                bool changed = f >= 0 || b >= 0;
                for (int v = 0; v < n_; ++v)
                    if (next[v] >= 0) {
                        int aged = std::min(next[v] + 1, cap_);
                        changed |= aged != next[v];
                        next[v] = aged;
                    }
                if (!changed) continue;
                int rest = best(next);
                // rest counts from the next cycle; this cycle adds one.
                result = std::min(result, 1 + rest);
            }
        return memo_[age] = result;
    }

    int n_;
    DependencyGraph dag_;
    std::vector<bool> fpu_;
    std::vector<int> occ_;
    int cap_ = 1;
    std::map<std::vector<int>, int> memo_;
};

inline int brute_force_min_length(std::span<const Instruction> block, const MachineConfig& config = {}) {
    return BruteForce(block, config).minimum();
}

// Random straight-line block over small register pools. With `streams`,
// memory ops get random stream ids; otherwise every access may alias.
// Addresses stay 16-byte aligned: pointers move by multiples of 16 and the
// index register is r0 (zero). With `streams`, pointers only advance in place.
inline Program random_block(SplitMix64& rng, int n, bool streams) {
    static constexpr Opcode ops[] = {Opcode::LDQ,     Opcode::LDP,     Opcode::LDS,    Opcode::STQ,    Opcode::FMUL_CP,
                                     Opcode::FMUL_CS, Opcode::FMUL_CX, Opcode::FMA_CP, Opcode::FMA_CS, Opcode::FMA_CX,
                                     Opcode::FMOV_P,  Opcode::FMOV_S,  Opcode::ADDI};
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1)); };
    Program p;
    for (int i = 0; i < n; ++i) {
        Opcode op = ops[pick(0, static_cast<int>(std::size(ops)) - 1)];
        Instruction in = make(i, op, 0, 0, 0);
        switch (unit_of(op)) {
            case Unit::LSU:
                in.dst = static_cast<std::uint8_t>(pick(0, 5));
                in.a = static_cast<std::uint8_t>(pick(1, 3));
                in.b = 0;
                // Stream tags are truthful: pointer rK stays in its own region.
                in.stream = streams && pick(0, 3) != 0 ? in.a - 1 : -1;
                break;
            case Unit::FPU:
                in.dst = static_cast<std::uint8_t>(pick(0, 5));
                in.a = static_cast<std::uint8_t>(pick(0, 5));
                in.b = static_cast<std::uint8_t>(pick(0, 5));
                break;
            case Unit::IU:
                in.dst = static_cast<std::uint8_t>(pick(1, 3));
                in.a = streams ? in.dst : static_cast<std::uint8_t>(pick(1, 3));
                in.imm = 16 * pick(0, 2);
                break;
        }
        p.push_back(in);
    }
    return p;
}

// Machine state for random blocks: pointers r1..r3 inside a 1024-word
// memory filled with seeded values, FPRs seeded.
inline MachineState random_state(SplitMix64& rng) {
    MachineState s(1024);
    for (auto& w : s.memory) w = rng.symmetric_unit();
    s.gpr[1] = 0;
    s.gpr[2] = 512;
    s.gpr[3] = 1024;
    for (auto& f : s.fpr) f = {rng.symmetric_unit(), rng.symmetric_unit()};
    return s;
}

// Plain triple loop over the full 3x3x3 neighborhood; a neighbor takes part
// when the arity's shape includes it. Summation order differs from the
// kernels, so comparisons need a tolerance.
inline std::vector<double> naive_stencil(const std::vector<double>& a, const WeightSet& w, const StencilSpec& s,
                                         std::vector<double> r) {
    auto idx = [&](int i, int j, int k) { return (static_cast<std::size_t>(i) * s.N + j) * s.P + k; };
    for (int i = 1; i < s.M - 1; ++i)
        for (int j = 1; j < s.N - 1; ++j)
            for (int k = 1; k < s.P - 1; ++k) {
                double sum = 0;
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int dk = -1; dk <= 1; ++dk) {
                            const int dist = std::abs(di) + std::abs(dj) + std::abs(dk);
                            bool in_shape = s.arity == 27 || (s.arity == 7 && dist <= 1) ||
                                            (s.arity == 3 && di == 0 && dj == 0);
                            if (in_shape) sum += w.at(di, dj, dk) * a[idx(i + di, j + dj, k + dk)];
                        }
                r[idx(i, j, k)] = sum;
            }
    return r;
}

}  // namespace oracle
