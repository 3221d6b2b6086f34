#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppc450/depgraph.hpp"
#include "ppc450/isa.hpp"

namespace ppc450 {

struct ScheduleEntry {
    int position;  // index in the original block
    int id;        // instruction id
    int cycle;     // 1-based issue cycle

    bool operator==(const ScheduleEntry&) const = default;
};

/// Issue cycles for a block, sorted by (cycle, position). `length` is the
/// last cycle any unit is occupied: max(cycle + occupancy - 1).
struct Schedule {
    std::vector<ScheduleEntry> entries;
    int length = 0;

    // Block positions in issue order.
    std::vector<int> order() const;
};

// Builds a Schedule from per-position issue cycles.
Schedule make_schedule(std::span<const Instruction> block, std::span<const int> cycles,
                       const MachineConfig& config = {});

// The block's instructions in issue order.
Program apply_schedule(std::span<const Instruction> block, const Schedule& schedule);

// List scheduler: each cycle issues at most one FPU and one LSU/IU candidate
// among dependency-ready instructions, preferring the longest path to a sink,
// then program order.
Schedule schedule_greedy(std::span<const Instruction> block, const MachineConfig& config = {});

struct RegisterLimits {
    std::optional<int> gpr_max;
    std::optional<int> fpr_max;
};

struct ExactOptions {
    std::size_t max_block = 20;
    std::size_t node_limit = 200'000'000;
};

class ScheduleError : public std::runtime_error {
public:
    enum class Kind { CapExceeded, Infeasible, SearchLimit };
    ScheduleError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Depth-first branch and bound over cycle-by-cycle issue decisions, pruned by
// dependency/resource bounds against the incumbent. Returns a minimum-length
// schedule, honoring the register limits when given.
Schedule schedule_exact(std::span<const Instruction> block, const MachineConfig& config = {},
                        const RegisterLimits& limits = {}, const ExactOptions& options = {});

/// Per-cycle live register counts. Index 0 is cycle 1.
struct PressureProfile {
    std::vector<int> gpr;
    std::vector<int> fpr;
    int gpr_max = 0;
    int fpr_max = 0;
};

// A register is live from its defining issue cycle through the issue cycle
// of its last reader, inclusive. Registers read before any write in the block
// are live from cycle 1. Partial writes extend the current value.
PressureProfile register_pressure(const Schedule& schedule, std::span<const Instruction> block);

enum class ViolationKind { BadCycle, Missing, Duplicate, FpuConflict, SlotConflict, LsuSpacing, Dependency };

struct Violation {
    ViolationKind kind;
    int first = -1;   // instruction id
    int second = -1;  // instruction id
    int weight = 0;
    int cycle = 0;
    std::string message;
};

std::vector<Violation> validate_schedule(const Schedule& schedule, std::span<const Instruction> block,
                                         const MachineConfig& config = {});

// `cycle,instr_id,opcode`
std::string schedule_csv(const Schedule& schedule, std::span<const Instruction> block);

}  // namespace ppc450
