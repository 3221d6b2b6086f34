#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ppc450 {

// Machine constants of the modeled in-order dual-issue core. Bandwidths are
// bytes per cycle, latencies and occupancies are cycles.
struct MachineConfig {
    double clock_hz = 850e6;
    int fpu_latency = 5;
    int fpu_occupancy = 1;
    int lsu_occupancy = 2;
    int iu_occupancy = 2;  // integer ops share the load/store issue pipe
    int load_latency_l1 = 4;
    int load_latency_l2 = 15;
    int l3_penalty = 50;
    int dram_penalty = 50;  // added on top of the L3 latency
    int max_outstanding_misses = 3;
    int gpr_count = 32;
    int fpr_count = 32;

    int l1_bytes = 32768;
    int l1_line_bytes = 32;
    int l1_sets = 16;
    int l1_ways = 64;

    int l2_slots = 15;
    int l2_line_bytes = 128;
    int l2_prefetch_depth = 2;  // lines kept ahead per stream; 0 disables prefetch
    bool optimistic_prefetch = true;

    long l3_bytes = 8388608;
    int l3_line_bytes = 128;
    int l3_ways = 8;
    double l3_link_bw = 4.5;

    double read_bw_l1 = 8.0;
    double read_bw_l3 = 4.7;
    double read_bw_dram = 3.7;
    double write_bw = 5.3;

    // Throws std::invalid_argument naming the first non-positive field.
    void validate() const;
};

enum class Unit : std::uint8_t { FPU, LSU, IU };

enum class Opcode : std::uint8_t {
    LDQ,
    LDP,
    LDS,
    STQ,
    FMUL_CP,
    FMUL_CS,
    FMUL_CX,
    FMA_CP,
    FMA_CS,
    FMA_CX,
    FMOV_P,
    FMOV_S,
    ADDI,
    LOOPDEC,
};

inline constexpr std::array kAllOpcodes = {
    Opcode::LDQ,    Opcode::LDP,    Opcode::LDS,     Opcode::STQ,    Opcode::FMUL_CP,
    Opcode::FMUL_CS, Opcode::FMUL_CX, Opcode::FMA_CP, Opcode::FMA_CS, Opcode::FMA_CX,
    Opcode::FMOV_P, Opcode::FMOV_S, Opcode::ADDI,    Opcode::LOOPDEC,
};

std::string_view opcode_name(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view name);

Unit unit_of(Opcode op);
bool is_load(Opcode op);
bool is_memory(Opcode op);

struct Resource {
    Unit unit;
    int occupancy;
    int latency;

    bool operator==(const Resource&) const = default;
};

// Unit, issue occupancy and result latency. Load latency is the L1 hit
// latency; the pipeline's memory model resolves the actual tier at access time.
Resource instruction_resource(Opcode op, const MachineConfig& config = {});

enum class RegFile : std::uint8_t { GPR, FPR };

struct RegRef {
    RegFile file;
    std::uint8_t index;

    bool operator==(const RegRef&) const = default;
    auto operator<=>(const RegRef&) const = default;
};

/// One virtual-ISA operation.
///
/// Operand roles by opcode:
///   loads      dst = FPR, a = base GPR, b = index GPR
///   STQ        dst = FPR being stored, a = base GPR, b = index GPR
///   FMUL/FMA   dst = FPR, a = weight FPR, b = data FPR
///   FMOV       dst = FPR, a = source FPR
///   ADDI       dst = GPR, a = source GPR, imm
///   LOOPDEC    dst = counter GPR, imm = branch target (instruction index)
///
/// `stream` names the memory stream a load/store touches; -1 means unknown and
/// is treated as aliasing every other memory access.
struct Instruction {
    int id = 0;
    Opcode op = Opcode::ADDI;
    std::uint8_t dst = 0;
    std::uint8_t a = 0;
    std::uint8_t b = 0;
    std::int32_t imm = 0;
    int stream = -1;
    std::string comment;

    bool operator==(const Instruction&) const = default;
};

using Program = std::vector<Instruction>;

// Register operands written / read by an instruction. A partial write (LDP,
// LDS, FMOV_P, FMOV_S) is a write that leaves the other half intact.
std::vector<RegRef> writes_of(const Instruction& instr);
std::vector<RegRef> reads_of(const Instruction& instr);
bool is_partial_write(Opcode op);

// Checks register indices and that the opcode's operands are well formed.
// Throws std::invalid_argument.
void check_instruction(const Instruction& instr, const MachineConfig& config = {});

struct FprPair {
    double p = 0.0;
    double s = 0.0;

    bool operator==(const FprPair&) const = default;
};

/// Architectural state. Memory is a flat region of 8-byte words; byte address
/// 0 is 16-byte aligned.
struct MachineState {
    std::array<std::uint32_t, 32> gpr{};
    std::array<FprPair, 32> fpr{};
    std::vector<double> memory;

    MachineState() = default;
    explicit MachineState(std::size_t memory_words) : memory(memory_words, 0.0) {}

    bool operator==(const MachineState&) const = default;
};

// Raised for misaligned or out-of-bounds accesses and runaway loops.
class ExecutionFault : public std::runtime_error {
public:
    ExecutionFault(int instr_id, const std::string& what)
        : std::runtime_error("instruction " + std::to_string(instr_id) + ": " + what),
          instr_id_(instr_id) {}
    int instr_id() const { return instr_id_; }

private:
    int instr_id_;
};

// Byte address an instruction touches (loads/stores only).
std::uint32_t effective_address(const MachineState& state, const Instruction& instr);

// Applies one instruction in place. Returns the index of the next instruction
// to execute given the current one sits at `pc`.
std::size_t execute_in_place(MachineState& state, const Instruction& instr, std::size_t pc);

MachineState execute(MachineState state, const Instruction& instr);

struct RunStats {
    std::size_t executed = 0;
};

// Untimed in-order execution. Throws ExecutionFault when `step_limit`
// instructions have executed without reaching the end of the program.
MachineState run_program(std::span<const Instruction> program, MachineState state,
                         std::size_t step_limit, RunStats* stats = nullptr);

// Textual listing: `OPCODE dst, srcA[, srcB]  ; [sN] comment`.
std::string format_instruction(const Instruction& instr);
std::string format_listing(std::span<const Instruction> program);
Instruction parse_instruction(std::string_view line, int id);
// Blank lines and lines starting with ';' are skipped.
Program parse_listing(std::string_view text);

}  // namespace ppc450
