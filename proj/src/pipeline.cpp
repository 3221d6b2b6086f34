#include "ppc450/pipeline.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ppc450 {

std::string_view stall_reason_name(StallReason reason) {
    switch (reason) {
        case StallReason::None: return "none";
        case StallReason::RAW: return "RAW";
        case StallReason::WARWAW: return "WAR/WAW";
        case StallReason::UnitBusy: return "unit-busy";
        case StallReason::MissLimit: return "miss-limit";
    }
    return "?";
}

namespace {

int slot_index(RegRef r) { return r.index + (r.file == RegFile::FPR ? 32 : 0); }

struct Check {
    StallReason reason = StallReason::None;
    int on = -1;
};

class Core {
public:
    Core(const MachineConfig& config, MemoryModel& memory, MachineState state)
        : config_(config), memory_(memory), state_(std::move(state)) {
        ready_.fill(0);
        writer_.fill(-1);
        last_read_.fill(0);
        last_read_id_.fill(-1);
        last_write_.fill(0);
    }

    Check check(const Instruction& in, long c, bool slot_b_taken) const {
        for (const auto& r : reads_of(in)) {
            const int s = slot_index(r);
            if (ready_[s] > c) return {StallReason::RAW, writer_[s]};
        }
        for (const auto& r : writes_of(in)) {
            const int s = slot_index(r);
            if (last_read_[s] >= c) return {StallReason::WARWAW, last_read_id_[s]};
            if (last_write_[s] >= c) return {StallReason::WARWAW, writer_[s]};
        }
        const Unit u = unit_of(in.op);
        if (u == Unit::FPU && fpu_free_ > c) return {StallReason::UnitBusy, fpu_last_};
        if (u != Unit::FPU && slot_b_taken) return {StallReason::UnitBusy, slot_b_last_};
        if (u != Unit::FPU && slot_b_free_ > c) return {StallReason::UnitBusy, slot_b_last_};
        if (is_load(in.op) && memory_.load_blocked(effective_address(state_, in), c)) return {StallReason::MissLimit, -1};
        return {};
    }

    // Issues `in` at cycle c; returns the next pc.
    std::size_t issue(const Instruction& in, long c, std::size_t pc) {
        const Resource res = instruction_resource(in.op, config_);
        int latency = res.latency;
        if (is_memory(in.op)) {
            const std::uint32_t addr = effective_address(state_, in);
            if (is_load(in.op))
                latency = memory_.load(addr, c);
            else
                memory_.store(addr, c);
        }
        const std::size_t next = execute_in_place(state_, in, pc);
        for (const auto& r : reads_of(in)) {
            const int s = slot_index(r);
            last_read_[s] = std::max(last_read_[s], c);
            last_read_id_[s] = in.id;
        }
        for (const auto& r : writes_of(in)) {
            const int s = slot_index(r);
            ready_[s] = std::max(ready_[s], c + latency);
            drain_ = std::max(drain_, c + latency - 1);
            writer_[s] = in.id;
            last_write_[s] = c;
        }
        if (res.unit == Unit::FPU) {
            fpu_free_ = c + res.occupancy;
            fpu_last_ = in.id;
        } else {
            slot_b_last_ = in.id;
            slot_b_free_ = c + res.occupancy;
        }
        end_ = std::max(end_, c + res.occupancy - 1);
        return next;
    }

    long end() const { return end_; }
    long drain() const { return std::max(end_, drain_); }
    MachineState& state() { return state_; }

private:
    const MachineConfig& config_;
    MemoryModel& memory_;
    MachineState state_;
    std::array<long, 64> ready_{};
    std::array<int, 64> writer_{};
    std::array<long, 64> last_read_{};
    std::array<int, 64> last_read_id_{};
    std::array<long, 64> last_write_{};
    long fpu_free_ = 0, slot_b_free_ = 0;
    int fpu_last_ = -1, slot_b_last_ = -1;
    long end_ = 0;
    long drain_ = 0;
};

}  // namespace

SimTrace simulate(std::span<const Instruction> program, const MachineConfig& config, MemoryModel& memory,
                  MachineState initial, const SimOptions& options) {
    if (options.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    for (const auto& in : program) check_instruction(in, config);
    SimTrace trace;
    Core core(config, memory, std::move(initial));
    std::size_t pc = 0;
    int iteration = 0;
    std::size_t executed = 0;
    long c = 1;

    auto at_end = [&] {
        while (pc >= program.size()) {
            if (iteration + 1 >= options.iterations) return true;
            if (options.marker_pc < 0) trace.marks.push_back(core.end());
            ++iteration;
            pc = 0;
            if (program.empty()) return true;
        }
        return false;
    };
    auto do_issue = [&](std::size_t at) {
        if (executed++ == options.step_limit)
            throw ExecutionFault(program[at].id, "step limit of " + std::to_string(options.step_limit) + " exceeded");
        if (static_cast<long>(at) == options.marker_pc) trace.marks.push_back(c);
        ++trace.issued;
        return core.issue(program[at], c, at);
    };

    while (!at_end()) {
        CycleRecord rec;
        rec.cycle = c;
        const Instruction& head = program[pc];
        Check first = core.check(head, c, false);
        if (first.reason != StallReason::None) {
            rec.reason = first.reason;
            rec.stall_on = first.on;
            ++trace.stalls[static_cast<std::size_t>(first.reason)];
        } else {
            const bool head_fpu = unit_of(head.op) == Unit::FPU;
            (head_fpu ? rec.slot_a : rec.slot_b) = head.id;
            const std::size_t next = do_issue(pc);
            const bool taken = head.op == Opcode::LOOPDEC && next != pc + 1;
            pc = next;
            if (!taken && !at_end()) {
                const Instruction& second = program[pc];
                const bool second_fpu = unit_of(second.op) == Unit::FPU;
                if (second_fpu != head_fpu && core.check(second, c, !head_fpu).reason == StallReason::None) {
                    (second_fpu ? rec.slot_a : rec.slot_b) = second.id;
                    pc = do_issue(pc);
                }
            }
        }
        if (options.record_trace) trace.records.push_back(rec);
        ++c;
    }
    if (options.marker_pc < 0 && options.iterations > 1) trace.marks.push_back(core.end());
    trace.cycles = core.end();
    trace.completion = core.drain();
    trace.final_state = std::move(core.state());
    trace.memory = memory.stats();
    return trace;
}

long steady_state_cycles(std::span<const Instruction> program, std::size_t loop_end_pc, const MachineConfig& config,
                         MemoryModel& memory, MachineState initial) {
    if (loop_end_pc >= program.size()) throw std::invalid_argument("loop end outside the program");
    SimOptions opt;
    opt.record_trace = false;
    opt.marker_pc = static_cast<long>(loop_end_pc);
    SimTrace t = simulate(program, config, memory, std::move(initial), opt);
    if (t.marks.size() < 4)
        throw std::runtime_error("loop ran " + std::to_string(t.marks.size()) +
                                 " iterations; at least 4 are needed to reach steady state");
    return t.marks[t.marks.size() - 1] - t.marks[t.marks.size() - 2];
}

BandwidthResult effective_bandwidth(int stream_count, const MachineConfig& config, Tier tier, long bytes_per_stream) {
    if (stream_count < 1 || stream_count > 24) throw std::invalid_argument("stream_count must be in 1..24");
    if (bytes_per_stream < 64 || bytes_per_stream % 16 != 0)
        throw std::invalid_argument("bytes_per_stream must be a multiple of 16 and at least 64");
    // Streams are 1 MiB apart; r1 is the loop counter, r2 holds zero.
    const std::uint32_t spacing = 1u << 20;
    Program p;
    int id = 0;
    for (int s = 0; s < stream_count; ++s) {
        Instruction ld{id++, Opcode::LDQ, static_cast<std::uint8_t>(s), static_cast<std::uint8_t>(3 + s), 2, 0, s, ""};
        p.push_back(ld);
        p.push_back({id++, Opcode::ADDI, static_cast<std::uint8_t>(3 + s), static_cast<std::uint8_t>(3 + s), 0, 16, -1, ""});
    }
    p.push_back({id++, Opcode::LOOPDEC, 1, 0, 0, 0, -1, ""});

    MachineState st;
    st.gpr.fill(0);
    st.gpr[1] = static_cast<std::uint32_t>(bytes_per_stream / 16);
    for (int s = 0; s < stream_count; ++s) st.gpr[3 + s] = static_cast<std::uint32_t>(s) * spacing;
    st.memory.assign(static_cast<std::size_t>(stream_count - 1) * spacing / 8 + bytes_per_stream / 8 + 2, 0.0);

    MemoryModel memory(tier, config);
    for (int s = 0; s < stream_count; ++s)
        memory.warm_l3(static_cast<std::uint64_t>(s) * spacing, static_cast<std::uint64_t>(s) * spacing + bytes_per_stream);
    SimOptions opt;
    opt.record_trace = false;
    SimTrace t = simulate(p, config, memory, std::move(st), opt);

    BandwidthResult r;
    r.stats = memory.stats();
    r.bytes_per_cycle = static_cast<double>(stream_count) * bytes_per_stream / static_cast<double>(t.completion);
    const long misses = r.stats.l2_hits + r.stats.l2_misses;
    r.l1_miss_fill_rate = misses ? static_cast<double>(r.stats.l2_hits) / misses : 0.0;
    return r;
}

std::string trace_csv(const SimTrace& trace) {
    std::ostringstream os;
    os << "cycle,slotA_instr,slotB_instr,stall_reason,stall_on\n";
    for (const auto& r : trace.records)
        os << r.cycle << ',' << r.slot_a << ',' << r.slot_b << ',' << stall_reason_name(r.reason) << ',' << r.stall_on
           << '\n';
    return os.str();
}

std::string trace_summary(const SimTrace& trace) {
    std::ostringstream os;
    os << "cycles: " << trace.cycles << '\n' << "issued: " << trace.issued << '\n';
    for (std::size_t k = 1; k < kStallReasonCount; ++k)
        os << "stalls." << stall_reason_name(static_cast<StallReason>(k)) << ": " << trace.stalls[k] << '\n';
    const auto& m = trace.memory;
    os << "loads: " << m.loads << "\nstores: " << m.stores << "\nl1_hits: " << m.l1_hits << "\nl1_misses: " << m.l1_misses
       << "\nl2_hits: " << m.l2_hits << "\nl3_hits: " << m.l3_hits << "\nl3_misses: " << m.l3_misses
       << "\nprefetches: " << m.prefetches << '\n';
    return os.str();
}

}  // namespace ppc450
