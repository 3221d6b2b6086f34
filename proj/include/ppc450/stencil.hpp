#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppc450/isa.hpp"

namespace ppc450 {

enum class SubKernel : std::uint8_t { MM, LC };

class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Kernel configuration. Grid A[i][j][k] is M x N x P, flattened
/// (i*N + j)*P + k. Interior sizes M-2 and N-2 must divide by i_jam and
/// j_jam, and P-2 by 2.
struct StencilSpec {
    int arity = 3;
    SubKernel kernel = SubKernel::LC;
    int i_jam = 1;
    int j_jam = 1;
    int M = 14;
    int N = 14;
    int P = 14;

    std::string name() const;  // e.g. "27-mm-2x3"
    void validate() const;     // throws InvalidSpec

    bool operator==(const StencilSpec&) const = default;
};

// "27-mm-2x3" (dims keep their defaults).
StencilSpec parse_spec_name(const std::string& name);

// Line-oriented key=value text: stencil=27, kernel=mm, unroll=2x3,
// dims=26x26x26 (or a single edge length). Keys absent from `text` keep the
// values of `base`. '#' starts a comment.
StencilSpec parse_spec_config(const std::string& text, StencilSpec base = {});
std::string spec_config(const StencilSpec& spec);

// The twelve configurations of the reference tables, in table order.
std::vector<StencilSpec> table_specs();

/// Symmetric coefficients w[|di|][|dj|][|dk|]. Arity 3 uses w[0][0][0]
/// (center) and w[0][0][1]; arity 7 additionally w[0][1][0] and w[1][0][0].
struct WeightSet {
    double w[2][2][2] = {};

    double at(int di, int dj, int dk) const;
    static WeightSet identity();
    static WeightSet random(int arity, std::uint64_t seed);
    bool operator==(const WeightSet&) const = default;
};

// Per-iteration resource counts of a kernel (one iteration = one SIMD pair
// of k for every jammed output).
struct KernelPlan {
    StencilSpec spec;
    int frame = 0;              // input streams
    int outputs = 0;            // output streams
    int stencils_per_iteration = 0;
    int unaligned_rows = 0;     // rows needing a shifted operand
    int aligned_rows = 0;
    int reg_input = 0;
    int reg_result = 0;
    int reg_weight = 0;
    int loads = 0;
    int stores = 0;
    int fpu_ops = 0;
    int lsu_cycles_ld = 0;
    int lsu_cycles_st = 0;
    int fpu_cycles = 0;
    double util_ldst = 0;
    double util_fpu = 0;
    double bytes_per_stencil = 0;
    int gprs = 0;

    int lsu_cycles() const { return lsu_cycles_ld + lsu_cycles_st; }
};

// Throws InvalidSpec when the spec is malformed or needs more registers than
// the machine has.
KernelPlan plan_kernel(const StencilSpec& spec, const MachineConfig& config = {});

/// Byte offsets of the weight table and the two grids in the simulated memory.
/// Both grids start at 8 mod 16 so that odd-k pairs are quad aligned.
struct MemoryLayout {
    std::size_t a_base = 0;
    std::size_t r_base = 0;
    std::size_t words = 0;  // total memory size in 8-byte words
    std::size_t grid_words = 0;
};

MemoryLayout layout_for(const StencilSpec& spec);

struct KernelProgram {
    StencilSpec spec;
    KernelPlan plan;
    WeightSet weights;
    MemoryLayout layout;
    Program instructions;
    std::size_t body_begin = 0;  // k-loop body; body_end - 1 is its LOOPDEC
    std::size_t body_end = 0;
    int steps_per_body = 1;
    std::vector<std::pair<std::size_t, std::size_t>> step_ranges;  // [begin, end) per step
};

KernelProgram generate_kernel(const StencilSpec& spec, const WeightSet& weights = WeightSet::identity(),
                              const MachineConfig& config = {});

// Reorders every step block of the loop body with the list scheduler.
KernelProgram schedule_kernel(KernelProgram kernel, const MachineConfig& config = {});

// Initial machine state: weight table, A, and R (size M*N*P each).
MachineState initial_state(const KernelProgram& kernel, std::span<const double> a, std::span<const double> r);
std::vector<double> read_result(const MachineState& state, const KernelProgram& kernel);

enum class EmitStyle { Listing, InlineC };

// Listing: one instruction per line, round-trips through parse_listing.
// InlineC: each instruction inside an asm statement of a C function skeleton.
std::string emit_assembly(std::span<const Instruction> program, EmitStyle style,
                          const std::string& function_name = "stencil_kernel");

// Listing with `;; spec <config>` and `;; body <begin> <end> steps <n>`
// headers so a kernel can be reloaded by parse_kernel_listing.
std::string kernel_listing(const KernelProgram& kernel);
KernelProgram parse_kernel_listing(const std::string& text, const MachineConfig& config = {});

}  // namespace ppc450
