#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppc450/isa.hpp"
#include "ppc450/memory_model.hpp"

namespace ppc450 {

enum class StallReason : std::uint8_t { None, RAW, WARWAW, UnitBusy, MissLimit };
inline constexpr std::size_t kStallReasonCount = 5;

std::string_view stall_reason_name(StallReason reason);

// One simulated cycle. Slots hold instruction ids, -1 when empty. When the
// next instruction in program order could not issue, `reason` names why and
// `stall_on` is the id of the instruction it waited on (-1 if none).
struct CycleRecord {
    long cycle = 0;
    int slot_a = -1;
    int slot_b = -1;
    StallReason reason = StallReason::None;
    int stall_on = -1;
};

struct SimOptions {
    bool record_trace = true;
    std::size_t step_limit = 100'000'000;
    int iterations = 1;     // back-to-back runs of the whole program
    long marker_pc = -1;    // record issue cycles of this instruction index
};

struct SimTrace {
    std::vector<CycleRecord> records;
    long cycles = 0;  // last cycle any unit is occupied
    long completion = 0;  // last cycle before every result is available
    long issued = 0;
    std::array<long, kStallReasonCount> stalls{};  // stalled cycles by reason
    std::vector<long> marks;  // marker issue cycles, or per-iteration end cycles
    MachineState final_state;
    MemoryStats memory;
};

// In-order dual-issue timing of `program` executed from `initial`. Slot A
// takes FPU instructions, slot B one LSU or IU instruction. The next
// instruction issues only when its unit is free, its RAW producers have
// completed, WAR/WAW partners issued in an earlier cycle, and (loads) the
// memory model is not at its outstanding-miss limit. A following adjacent
// instruction for the other slot may issue in the same cycle, except after a
// taken LOOPDEC.
SimTrace simulate(std::span<const Instruction> program, const MachineConfig& config, MemoryModel& memory,
                  MachineState initial, const SimOptions& options = {});

// Cycles between the last two issues of the loop-closing instruction at
// `loop_end_pc`. Throws std::runtime_error when it executes fewer than 4 times.
long steady_state_cycles(std::span<const Instruction> program, std::size_t loop_end_pc, const MachineConfig& config,
                         MemoryModel& memory, MachineState initial);

struct BandwidthResult {
    double bytes_per_cycle = 0;
    double l1_miss_fill_rate = 0;  // fraction of L1 misses served by the prefetch buffer
    MemoryStats stats;
};

// Pure-load loop over `stream_count` sequential streams, L3 warm. Measures
// bytes loaded per cycle over the whole run.
BandwidthResult effective_bandwidth(int stream_count, const MachineConfig& config, Tier tier = Tier::Full,
                                    long bytes_per_stream = 16384);

// `cycle,slotA_instr,slotB_instr,stall_reason,stall_on`
std::string trace_csv(const SimTrace& trace);

// Totals and per-cause stall counts, one `key: value` per line.
std::string trace_summary(const SimTrace& trace);

}  // namespace ppc450
