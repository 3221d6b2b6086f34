#include "ppc450/isa.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace ppc450 {

void MachineConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw std::invalid_argument(std::string("MachineConfig.") + name + " must be positive");
    };
    positive(clock_hz, "clock_hz");
    positive(fpu_latency, "fpu_latency");
    positive(fpu_occupancy, "fpu_occupancy");
    positive(lsu_occupancy, "lsu_occupancy");
    positive(iu_occupancy, "iu_occupancy");
    positive(load_latency_l1, "load_latency_l1");
    positive(load_latency_l2, "load_latency_l2");
    positive(l3_penalty, "l3_penalty");
    positive(dram_penalty, "dram_penalty");
    positive(max_outstanding_misses, "max_outstanding_misses");
    positive(gpr_count, "gpr_count");
    positive(fpr_count, "fpr_count");
    positive(l1_bytes, "l1_bytes");
    positive(l1_line_bytes, "l1_line_bytes");
    positive(l1_sets, "l1_sets");
    positive(l1_ways, "l1_ways");
    positive(l2_slots, "l2_slots");
    positive(l2_line_bytes, "l2_line_bytes");
    if (l2_prefetch_depth < 0 || l2_prefetch_depth > 2)
        throw std::invalid_argument("MachineConfig.l2_prefetch_depth must be 0 (off), 1 or 2");
    positive(static_cast<double>(l3_bytes), "l3_bytes");
    positive(l3_line_bytes, "l3_line_bytes");
    positive(l3_ways, "l3_ways");
    positive(l3_link_bw, "l3_link_bw");
    positive(read_bw_l1, "read_bw_l1");
    positive(read_bw_l3, "read_bw_l3");
    positive(read_bw_dram, "read_bw_dram");
    positive(write_bw, "write_bw");
    if (gpr_count > 32 || fpr_count > 32) throw std::invalid_argument("register files hold at most 32 entries");
    if (l1_sets * l1_ways * l1_line_bytes != l1_bytes)
        throw std::invalid_argument("L1 geometry does not multiply out to l1_bytes");
}

std::string_view opcode_name(Opcode op) {
    switch (op) {
        case Opcode::LDQ: return "LDQ";
        case Opcode::LDP: return "LDP";
        case Opcode::LDS: return "LDS";
        case Opcode::STQ: return "STQ";
        case Opcode::FMUL_CP: return "FMUL_CP";
        case Opcode::FMUL_CS: return "FMUL_CS";
        case Opcode::FMUL_CX: return "FMUL_CX";
        case Opcode::FMA_CP: return "FMA_CP";
        case Opcode::FMA_CS: return "FMA_CS";
        case Opcode::FMA_CX: return "FMA_CX";
        case Opcode::FMOV_P: return "FMOV_P";
        case Opcode::FMOV_S: return "FMOV_S";
        case Opcode::ADDI: return "ADDI";
        case Opcode::LOOPDEC: return "LOOPDEC";
    }
    return "?";
}

std::optional<Opcode> parse_opcode(std::string_view name) {
    for (Opcode op : kAllOpcodes)
        if (opcode_name(op) == name) return op;
    return std::nullopt;
}

Unit unit_of(Opcode op) {
    switch (op) {
        case Opcode::LDQ:
        case Opcode::LDP:
        case Opcode::LDS:
        case Opcode::STQ: return Unit::LSU;
        case Opcode::ADDI:
        case Opcode::LOOPDEC: return Unit::IU;
        default: return Unit::FPU;
    }
}

bool is_load(Opcode op) { return op == Opcode::LDQ || op == Opcode::LDP || op == Opcode::LDS; }
bool is_memory(Opcode op) { return unit_of(op) == Unit::LSU; }

bool is_partial_write(Opcode op) {
    return op == Opcode::LDP || op == Opcode::LDS || op == Opcode::FMOV_P || op == Opcode::FMOV_S;
}

Resource instruction_resource(Opcode op, const MachineConfig& config) {
    switch (unit_of(op)) {
        case Unit::FPU: return {Unit::FPU, config.fpu_occupancy, config.fpu_latency};
        case Unit::LSU:
            if (op == Opcode::STQ) return {Unit::LSU, config.lsu_occupancy, 0};
            return {Unit::LSU, config.lsu_occupancy, config.load_latency_l1};
        case Unit::IU: return {Unit::IU, config.iu_occupancy, 1};
    }
    return {Unit::IU, 1, 1};
}

namespace {

bool is_fma(Opcode op) { return op == Opcode::FMA_CP || op == Opcode::FMA_CS || op == Opcode::FMA_CX; }

RegRef gpr(std::uint8_t i) { return {RegFile::GPR, i}; }
RegRef fpr(std::uint8_t i) { return {RegFile::FPR, i}; }

}  // namespace

std::vector<RegRef> writes_of(const Instruction& in) {
    switch (in.op) {
        case Opcode::STQ: return {};
        case Opcode::ADDI:
        case Opcode::LOOPDEC: return {gpr(in.dst)};
        default: return {fpr(in.dst)};
    }
}

std::vector<RegRef> reads_of(const Instruction& in) {
    std::vector<RegRef> r;
    auto add = [&r](RegRef x) {
        for (const auto& y : r)
            if (y == x) return;
        r.push_back(x);
    };
    switch (in.op) {
        case Opcode::LDQ:
        case Opcode::LDP:
        case Opcode::LDS:
            add(gpr(in.a));
            add(gpr(in.b));
            break;
        case Opcode::STQ:
            add(fpr(in.dst));
            add(gpr(in.a));
            add(gpr(in.b));
            break;
        case Opcode::FMOV_P:
        case Opcode::FMOV_S: add(fpr(in.a)); break;
        case Opcode::ADDI: add(gpr(in.a)); break;
        case Opcode::LOOPDEC: add(gpr(in.dst)); break;
        default:
            if (is_fma(in.op)) add(fpr(in.dst));
            add(fpr(in.a));
            add(fpr(in.b));
            break;
    }
    return r;
}

void check_instruction(const Instruction& in, const MachineConfig& config) {
    auto bad = [&](const std::string& why) {
        throw std::invalid_argument("instruction " + std::to_string(in.id) + " (" +
                                    std::string(opcode_name(in.op)) + "): " + why);
    };
    for (const auto& r : writes_of(in)) {
        int limit = r.file == RegFile::GPR ? config.gpr_count : config.fpr_count;
        if (r.index >= limit) bad("destination register out of range");
    }
    for (const auto& r : reads_of(in)) {
        int limit = r.file == RegFile::GPR ? config.gpr_count : config.fpr_count;
        if (r.index >= limit) bad("source register out of range");
    }
    if (in.op == Opcode::LOOPDEC && in.imm < 0) bad("negative branch target");
}

std::uint32_t effective_address(const MachineState& state, const Instruction& in) {
    return state.gpr[in.a] + state.gpr[in.b];
}

namespace {

std::size_t checked_word(const MachineState& state, const Instruction& in, std::uint32_t addr,
                         unsigned bytes) {
    if (addr % bytes != 0)
        throw ExecutionFault(in.id, "misaligned " + std::to_string(bytes) + "-byte access at address " +
                                        std::to_string(addr));
    std::size_t word = addr / 8;
    if (word + bytes / 8 > state.memory.size())
        throw ExecutionFault(in.id, "out-of-bounds access at address " + std::to_string(addr));
    return word;
}

}  // namespace

std::size_t execute_in_place(MachineState& st, const Instruction& in, std::size_t pc) {
    FprPair& d = st.fpr[in.dst];
    switch (in.op) {
        case Opcode::LDQ: {
            std::size_t w = checked_word(st, in, effective_address(st, in), 16);
            d = {st.memory[w], st.memory[w + 1]};
            break;
        }
        case Opcode::LDP: d.p = st.memory[checked_word(st, in, effective_address(st, in), 8)]; break;
        case Opcode::LDS: d.s = st.memory[checked_word(st, in, effective_address(st, in), 8)]; break;
        case Opcode::STQ: {
            std::size_t w = checked_word(st, in, effective_address(st, in), 16);
            st.memory[w] = d.p;
            st.memory[w + 1] = d.s;
            break;
        }
        case Opcode::FMUL_CP: {
            const FprPair w = st.fpr[in.a], a = st.fpr[in.b];
            d = {w.p * a.p, w.p * a.s};
            break;
        }
        case Opcode::FMUL_CS: {
            const FprPair w = st.fpr[in.a], a = st.fpr[in.b];
            d = {w.s * a.p, w.s * a.s};
            break;
        }
        case Opcode::FMUL_CX: {
            const FprPair w = st.fpr[in.a], a = st.fpr[in.b];
            d = {w.s * a.s, w.s * a.p};
            break;
        }
        case Opcode::FMA_CP: {
            const FprPair w = st.fpr[in.a], a = st.fpr[in.b];
            d = {std::fma(w.p, a.p, d.p), std::fma(w.p, a.s, d.s)};
            break;
        }
        case Opcode::FMA_CS: {
            const FprPair w = st.fpr[in.a], a = st.fpr[in.b];
            d = {std::fma(w.s, a.p, d.p), std::fma(w.s, a.s, d.s)};
            break;
        }
        case Opcode::FMA_CX: {
            const FprPair w = st.fpr[in.a], a = st.fpr[in.b];
            d = {std::fma(w.s, a.s, d.p), std::fma(w.s, a.p, d.s)};
            break;
        }
        case Opcode::FMOV_P: d.p = st.fpr[in.a].p; break;
        case Opcode::FMOV_S: d.s = st.fpr[in.a].s; break;
        case Opcode::ADDI: st.gpr[in.dst] = st.gpr[in.a] + static_cast<std::uint32_t>(in.imm); break;
        case Opcode::LOOPDEC:
            st.gpr[in.dst] -= 1;
            if (st.gpr[in.dst] != 0) return static_cast<std::size_t>(in.imm);
            break;
    }
    return pc + 1;
}

MachineState execute(MachineState state, const Instruction& instr) {
    execute_in_place(state, instr, 0);
    return state;
}

MachineState run_program(std::span<const Instruction> program, MachineState state, std::size_t step_limit,
                         RunStats* stats) {
    if (step_limit == 0) throw std::invalid_argument("step_limit must be positive");
    std::size_t pc = 0;
    std::size_t executed = 0;
    while (pc < program.size()) {
        if (executed == step_limit)
            throw ExecutionFault(program[pc].id, "step limit of " + std::to_string(step_limit) +
                                                     " exceeded (nonterminating loop?)");
        pc = execute_in_place(state, program[pc], pc);
        ++executed;
    }
    if (stats) stats->executed = executed;
    return state;
}

// ---------------------------------------------------------------------------
// Listing format

std::string format_instruction(const Instruction& in) {
    std::ostringstream os;
    auto f = [](int i) { return "f" + std::to_string(i); };
    auto r = [](int i) { return "r" + std::to_string(i); };
    os << opcode_name(in.op) << ' ';
    switch (in.op) {
        case Opcode::LDQ:
        case Opcode::LDP:
        case Opcode::LDS:
        case Opcode::STQ: os << f(in.dst) << ", " << r(in.a) << ", " << r(in.b); break;
        case Opcode::FMOV_P:
        case Opcode::FMOV_S: os << f(in.dst) << ", " << f(in.a); break;
        case Opcode::ADDI: os << r(in.dst) << ", " << r(in.a) << ", " << in.imm; break;
        case Opcode::LOOPDEC: os << r(in.dst) << ", " << in.imm; break;
        default: os << f(in.dst) << ", " << f(in.a) << ", " << f(in.b); break;
    }
    if (in.stream >= 0 || !in.comment.empty()) {
        os << "  ;";
        if (in.stream >= 0) os << " [s" << in.stream << "]";
        if (!in.comment.empty()) os << ' ' << in.comment;
    }
    return os.str();
}

std::string format_listing(std::span<const Instruction> program) {
    std::string out;
    for (const auto& in : program) {
        out += format_instruction(in);
        out += '\n';
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

long parse_int(std::string_view s, std::string_view line) {
    s = trim(s);
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::invalid_argument("bad integer '" + std::string(s) + "' in: " + std::string(line));
    return v;
}

std::uint8_t parse_reg(std::string_view s, char prefix, std::string_view line) {
    s = trim(s);
    if (s.size() < 2 || s.front() != prefix)
        throw std::invalid_argument("expected " + std::string(1, prefix) + "-register, got '" + std::string(s) +
                                    "' in: " + std::string(line));
    long v = parse_int(s.substr(1), line);
    if (v < 0 || v > 31) throw std::invalid_argument("register index out of range in: " + std::string(line));
    return static_cast<std::uint8_t>(v);
}

}  // namespace

Instruction parse_instruction(std::string_view line, int id) {
    Instruction in;
    in.id = id;
    std::string_view code = line;
    if (auto semi = line.find(';'); semi != std::string_view::npos) {
        code = line.substr(0, semi);
        std::string_view rest = line.substr(semi + 1);
        if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        if (rest.size() >= 3 && rest[0] == '[' && rest[1] == 's') {
            auto close = rest.find(']');
            if (close == std::string_view::npos) throw std::invalid_argument("unterminated stream tag: " + std::string(line));
            in.stream = static_cast<int>(parse_int(rest.substr(2, close - 2), line));
            rest.remove_prefix(close + 1);
            if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        }
        in.comment = std::string(rest);
    }
    code = trim(code);
    auto sp = code.find(' ');
    std::string_view mnemonic = code.substr(0, sp);
    auto op = parse_opcode(mnemonic);
    if (!op) throw std::invalid_argument("unknown opcode '" + std::string(mnemonic) + "'");
    in.op = *op;
    std::vector<std::string_view> args;
    if (sp != std::string_view::npos) {
        std::string_view operands = code.substr(sp + 1);
        std::size_t start = 0;
        while (true) {
            auto comma = operands.find(',', start);
            args.push_back(trim(operands.substr(start, comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
    }
    auto expect = [&](std::size_t n) {
        if (args.size() != n)
            throw std::invalid_argument("expected " + std::to_string(n) + " operands in: " + std::string(line));
    };
    switch (in.op) {
        case Opcode::LDQ:
        case Opcode::LDP:
        case Opcode::LDS:
        case Opcode::STQ:
            expect(3);
            in.dst = parse_reg(args[0], 'f', line);
            in.a = parse_reg(args[1], 'r', line);
            in.b = parse_reg(args[2], 'r', line);
            break;
        case Opcode::FMOV_P:
        case Opcode::FMOV_S:
            expect(2);
            in.dst = parse_reg(args[0], 'f', line);
            in.a = parse_reg(args[1], 'f', line);
            break;
        case Opcode::ADDI:
            expect(3);
            in.dst = parse_reg(args[0], 'r', line);
            in.a = parse_reg(args[1], 'r', line);
            in.imm = static_cast<std::int32_t>(parse_int(args[2], line));
            break;
        case Opcode::LOOPDEC:
            expect(2);
            in.dst = parse_reg(args[0], 'r', line);
            in.imm = static_cast<std::int32_t>(parse_int(args[1], line));
            break;
        default:
            expect(3);
            in.dst = parse_reg(args[0], 'f', line);
            in.a = parse_reg(args[1], 'f', line);
            in.b = parse_reg(args[2], 'f', line);
            break;
    }
    return in;
}

Program parse_listing(std::string_view text) {
    Program program;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        std::string_view t = trim(line);
        if (!t.empty() && t.front() != ';') program.push_back(parse_instruction(t, static_cast<int>(program.size())));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return program;
}

}  // namespace ppc450
