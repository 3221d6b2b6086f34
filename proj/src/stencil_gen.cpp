#include <algorithm>
#include <array>
#include <cstdlib>
#include <optional>
#include <sstream>

#include "ppc450/scheduler.hpp"
#include "ppc450/stencil.hpp"

namespace ppc450 {

namespace {

constexpr std::uint8_t kZero = 0, kEight = 1, kSixteen = 2, kCounterK = 3, kCounterJ = 4, kCounterI = 5;
constexpr std::uint8_t kFirstPointer = 6;

enum class Form { CP, CS, CX };

struct Consumer {
    int output;
    std::uint8_t weight;
    bool full;        // all three k terms; otherwise the center term only
    Form center;      // CP or CS for the center term
    std::string wname;
};

struct Row {
    int di, dj;
    bool unaligned;
    int stream;
    std::uint8_t ptr;
    std::uint8_t x, y;  // y only for lc unaligned rows
    std::vector<Consumer> consumers;
};

std::string row_name(int di, int dj) {
    auto off = [](int d) { return d == 0 ? std::string("") : (d > 0 ? "+" : "") + std::to_string(d); };
    return "a[i" + off(di) + "][j" + off(dj) + "]";
}

class Generator {
public:
    Generator(const StencilSpec& spec, const KernelPlan& plan) : spec_(spec), plan_(plan) {
        build_rows();
    }

    KernelProgram run(const WeightSet& weights) {
        KernelProgram k;
        k.spec = spec_;
        k.plan = plan_;
        k.weights = weights;
        k.layout = layout_for(spec_);
        layout_ = k.layout;

        const int groups_i = (spec_.M - 2) / spec_.i_jam;
        const int groups_j = (spec_.N - 2) / spec_.j_jam;
        const int k_steps = (spec_.P - 2) / 2;
        const bool lc = spec_.kernel == SubKernel::LC;
        const int steps = lc ? 2 : 1;
        const int k_iters = k_steps / steps;
        const bool tail_step = k_steps % steps != 0;

        emit(Opcode::ADDI, kEight, kZero, 0, 8, -1, "const 8");
        emit(Opcode::ADDI, kSixteen, kZero, 0, 16, -1, "const 16");
        for (int n = 0; n < plan_.reg_weight; ++n) {
            emit(Opcode::ADDI, kFirstPointer, kZero, 0, 16 * n, -1, "weight table entry " + std::to_string(n));
            emit(Opcode::LDQ, static_cast<std::uint8_t>(n), kFirstPointer, kZero, 0, -1, weight_comment(n));
        }
        for (const Row& r : rows_)
            emit(Opcode::ADDI, r.ptr, kZero, 0, static_cast<std::int32_t>(input_start(r.di, r.dj)), -1,
                 "p" + std::to_string(r.stream) + " = &" + row_name(r.di, r.dj) + "[-1]");
        for (int o = 0; o < plan_.outputs; ++o)
            emit(Opcode::ADDI, out_ptr(o), kZero, 0, static_cast<std::int32_t>(output_start(o)), -1,
                 "q" + std::to_string(o) + " = &" + out_name(o) + "[-1]");
        emit(Opcode::ADDI, kCounterI, kZero, 0, groups_i, -1, "i groups");

        const std::int32_t i_label = static_cast<std::int32_t>(prog_.size());
        emit(Opcode::ADDI, kCounterJ, kZero, 0, groups_j, -1, "j groups");
        const std::int32_t j_label = static_cast<std::int32_t>(prog_.size());
        prime();
        emit(Opcode::ADDI, kCounterK, kZero, 0, k_iters, -1, "k iterations");

        k.body_begin = prog_.size();
        for (int s = 0; s < steps; ++s) {
            const std::size_t b = prog_.size();
            step(s % 2 == 1);
            k.step_ranges.emplace_back(b, prog_.size());
        }
        emit(Opcode::LOOPDEC, kCounterK, 0, 0, static_cast<std::int32_t>(k.body_begin), -1, "next k pair");
        k.body_end = prog_.size();
        k.steps_per_body = steps;
        if (tail_step) step(false);

        const std::int64_t j_delta = 8LL * spec_.P * (spec_.j_jam - 1);
        if (j_delta != 0) advance(static_cast<std::int32_t>(j_delta), "next j group");
        emit(Opcode::LOOPDEC, kCounterJ, 0, 0, j_label, -1, "next j group");
        const std::int64_t i_delta = 8LL * spec_.P * (static_cast<std::int64_t>(spec_.i_jam) * spec_.N - spec_.N + 2);
        advance(static_cast<std::int32_t>(i_delta), "next i group");
        emit(Opcode::LOOPDEC, kCounterI, 0, 0, i_label, -1, "next i group");

        k.instructions = std::move(prog_);
        return k;
    }

private:
    void build_rows() {
        const int i = spec_.i_jam, j = spec_.j_jam;
        const bool lc = spec_.kernel == SubKernel::LC;
        const int lo = spec_.arity == 3 ? 0 : -1;
        const int hi_i = spec_.arity == 3 ? i - 1 : i, hi_j = spec_.arity == 3 ? j - 1 : j;
        std::uint8_t next_fpr = static_cast<std::uint8_t>(plan_.reg_weight + plan_.outputs);
        int stream = 0;
        for (int di = lo; di <= hi_i; ++di) {
            for (int dj = lo; dj <= hi_j; ++dj) {
                const bool edge_i = di == -1 || di == i, edge_j = dj == -1 || dj == j;
                if (spec_.arity == 7 && edge_i && edge_j) continue;
                Row r;
                r.di = di;
                r.dj = dj;
                r.unaligned = spec_.arity == 27 || (!edge_i && !edge_j);
                r.stream = stream;
                r.ptr = static_cast<std::uint8_t>(kFirstPointer + stream);
                ++stream;
                r.x = next_fpr++;
                r.y = lc && r.unaligned ? next_fpr++ : r.x;
                for (int oi = 0; oi < i; ++oi)
                    for (int oj = 0; oj < j; ++oj)
                        if (auto c = consumer(oi * j + oj, di - oi, dj - oj)) r.consumers.push_back(*c);
                rows_.push_back(std::move(r));
            }
        }
    }

    std::optional<Consumer> consumer(int output, int si, int sj) const {
        const int ai = std::abs(si), aj = std::abs(sj);
        if (ai > 1 || aj > 1) return std::nullopt;
        switch (spec_.arity) {
            case 27: return Consumer{output, static_cast<std::uint8_t>(2 * ai + aj), true, Form::CP, "w" + std::to_string(ai) + std::to_string(aj)};
            case 7:
                if (ai == 0 && aj == 0) return Consumer{output, 0, true, Form::CP, "w00"};
                if (ai + aj == 2) return std::nullopt;
                return Consumer{output, 1, false, ai == 1 ? Form::CP : Form::CS, ai == 1 ? "w10" : "w01"};
            default:
                if (ai == 0 && aj == 0) return Consumer{output, 0, true, Form::CP, "w00"};
                return std::nullopt;
        }
    }

    std::string weight_comment(int n) const {
        switch (spec_.arity) {
            case 3: return "f0 = (w_center, w_edge)";
            case 7: return n == 0 ? "f0 = (w_center, w_k)" : "f1 = (w_i, w_j)";
            default: {
                const int ai = n / 2, aj = n % 2;
                return "f" + std::to_string(n) + " = (w" + std::to_string(ai) + std::to_string(aj) + "0, w" +
                       std::to_string(ai) + std::to_string(aj) + "1)";
            }
        }
    }

    std::uint8_t out_ptr(int o) const { return static_cast<std::uint8_t>(kFirstPointer + rows_.size() + o); }
    std::uint8_t acc(int o) const { return static_cast<std::uint8_t>(plan_.reg_weight + o); }
    std::string out_name(int o) const {
        const int oi = o / spec_.j_jam, oj = o % spec_.j_jam;
        auto off = [](int d) { return d == 0 ? std::string("") : "+" + std::to_string(d); };
        return "r[i" + off(oi) + "][j" + off(oj) + "]";
    }

    std::size_t row_offset(int i, int j) const {
        return 8 * (static_cast<std::size_t>(i) * spec_.N + j) * spec_.P;
    }
    std::size_t input_start(int di, int dj) const { return layout_.a_base + row_offset(1 + di, 1 + dj) - 8; }
    std::size_t output_start(int o) const {
        return layout_.r_base + row_offset(1 + o / spec_.j_jam, 1 + o % spec_.j_jam) - 8;
    }

    void emit(Opcode op, std::uint8_t dst, std::uint8_t a, std::uint8_t b, std::int32_t imm, int stream,
              std::string comment) {
        prog_.push_back({next_id_++, op, dst, a, b, imm, stream, std::move(comment)});
    }

    // First contribution to an accumulator in a step is a multiply.
    void fp(Form form, const Consumer& c, std::uint8_t data, const std::string& what) {
        const bool first = !started_[c.output];
        started_[c.output] = true;
        Opcode op;
        switch (form) {
            case Form::CP: op = first ? Opcode::FMUL_CP : Opcode::FMA_CP; break;
            case Form::CS: op = first ? Opcode::FMUL_CS : Opcode::FMA_CS; break;
            default: op = first ? Opcode::FMUL_CX : Opcode::FMA_CX; break;
        }
        const std::string lhs = "f" + std::to_string(acc(c.output)) + " = " + out_name(c.output);
        emit(op, acc(c.output), c.weight, data, 0, -1, lhs + (first ? " = " : " += ") + c.wname + " * " + what);
    }

    // Terms are accumulated in dk-major order: every row's k-1 term, then
    // every row's k term, then every row's k+1 term.
    void step(bool odd) {
        started_.assign(plan_.outputs, false);
        const bool lc = spec_.kernel == SubKernel::LC;
        auto rev = [odd](const Row& r) { return odd ? r.y : r.x; };  // (a[k], a[k-1])
        auto alg = [odd](const Row& r) { return odd ? r.x : r.y; };  // lc: (a[k], a[k+1])
        auto sid = [](const Row& r) { return "[s" + std::to_string(r.stream) + "] "; };

        for (const Row& r : rows_)
            if (!r.unaligned)
                emit(Opcode::LDQ, r.x, r.ptr, kZero, 0, r.stream,
                     sid(r) + "f" + std::to_string(r.x) + " = " + row_name(r.di, r.dj) + "(k, k+1)");
        for (const Row& r : rows_)
            if (r.unaligned)
                for (const auto& c : r.consumers)
                    if (c.full) fp(Form::CX, c, rev(r), row_name(r.di, r.dj) + "(k-1, k)");
        if (!lc)
            for (const Row& r : rows_)
                if (r.unaligned)
                    emit(Opcode::LDS, r.x, r.ptr, kEight, 0, r.stream,
                         sid(r) + "f" + std::to_string(r.x) + ".s = " + row_name(r.di, r.dj) + "(k+1)");
        for (const Row& r : rows_) {
            const std::uint8_t data = !r.unaligned ? r.x : (lc ? alg(r) : r.x);
            for (const auto& c : r.consumers) fp(c.center, c, data, row_name(r.di, r.dj) + "(k, k+1)");
        }
        for (const Row& r : rows_) {
            if (!r.unaligned) continue;
            const std::string name = row_name(r.di, r.dj);
            if (lc) {
                emit(Opcode::LDQ, rev(r), r.ptr, kSixteen, 0, r.stream,
                     sid(r) + "f" + std::to_string(rev(r)) + " = " + name + "(k+2, k+3)");
                emit(Opcode::FMOV_P, alg(r), rev(r), 0, 0, -1, "f" + std::to_string(alg(r)) + " = " + name + "(k+2, k+1)");
            } else {
                emit(Opcode::LDP, r.x, r.ptr, kSixteen, 0, r.stream,
                     sid(r) + "f" + std::to_string(r.x) + ".p = " + name + "(k+2)");
            }
        }
        for (const Row& r : rows_)
            if (r.unaligned)
                for (const auto& c : r.consumers)
                    if (c.full) fp(Form::CX, c, lc ? alg(r) : r.x, row_name(r.di, r.dj) + "(k+1, k+2)");
        for (int o = 0; o < plan_.outputs; ++o)
            emit(Opcode::STQ, acc(o), out_ptr(o), kZero, 0, static_cast<int>(rows_.size()) + o,
                 "[s" + std::to_string(rows_.size() + o) + "] " + out_name(o) + "(k, k+1) = f" + std::to_string(acc(o)));
        advance(16, "k += 2");
    }

    void prime() {
        const bool lc = spec_.kernel == SubKernel::LC;
        for (const Row& r : rows_) {
            if (!r.unaligned) continue;
            const std::string name = row_name(r.di, r.dj);
            const std::string sid = "[s" + std::to_string(r.stream) + "] ";
            if (lc) {
                emit(Opcode::LDQ, r.y, r.ptr, kSixteen, 0, r.stream, sid + "f" + std::to_string(r.y) + " = " + name + "(1, 2)");
                emit(Opcode::LDS, r.x, r.ptr, kEight, 0, r.stream, sid + "f" + std::to_string(r.x) + ".s = " + name + "(0)");
                emit(Opcode::FMOV_P, r.x, r.y, 0, 0, -1, "f" + std::to_string(r.x) + ".p = " + name + "(1)");
            } else {
                emit(Opcode::LDS, r.x, r.ptr, kEight, 0, r.stream, sid + "f" + std::to_string(r.x) + ".s = " + name + "(0)");
                emit(Opcode::LDP, r.x, r.ptr, kSixteen, 0, r.stream, sid + "f" + std::to_string(r.x) + ".p = " + name + "(1)");
            }
        }
        advance(16, "k = 1");
    }

    void advance(std::int32_t bytes, const std::string& why) {
        for (const Row& r : rows_)
            emit(Opcode::ADDI, r.ptr, r.ptr, 0, bytes, -1, "p" + std::to_string(r.stream) + ": " + why);
        for (int o = 0; o < plan_.outputs; ++o)
            emit(Opcode::ADDI, out_ptr(o), out_ptr(o), 0, bytes, -1, "q" + std::to_string(o) + ": " + why);
    }

    StencilSpec spec_;
    KernelPlan plan_;
    MemoryLayout layout_;
    std::vector<Row> rows_;
    Program prog_;
    int next_id_ = 0;
    std::vector<bool> started_;
};

std::array<std::pair<double, double>, 4> packed_weights(const StencilSpec& spec, const WeightSet& w) {
    std::array<std::pair<double, double>, 4> q{};
    switch (spec.arity) {
        case 3: q[0] = {w.w[0][0][0], w.w[0][0][1]}; break;
        case 7:
            q[0] = {w.w[0][0][0], w.w[0][0][1]};
            q[1] = {w.w[1][0][0], w.w[0][1][0]};
            break;
        default:
            for (int n = 0; n < 4; ++n) q[n] = {w.w[n / 2][n % 2][0], w.w[n / 2][n % 2][1]};
    }
    return q;
}

}  // namespace

KernelProgram generate_kernel(const StencilSpec& spec, const WeightSet& weights, const MachineConfig& config) {
    KernelPlan plan = plan_kernel(spec, config);
    return Generator(spec, plan).run(weights);
}

KernelProgram schedule_kernel(KernelProgram kernel, const MachineConfig& config) {
    for (const auto& [b, e] : kernel.step_ranges) {
        std::span<const Instruction> block(kernel.instructions.data() + b, e - b);
        Program reordered = apply_schedule(block, schedule_greedy(block, config));
        std::copy(reordered.begin(), reordered.end(), kernel.instructions.begin() + static_cast<long>(b));
    }
    return kernel;
}

MachineState initial_state(const KernelProgram& kernel, std::span<const double> a, std::span<const double> r) {
    const auto& l = kernel.layout;
    if (a.size() != l.grid_words || r.size() != l.grid_words)
        throw std::invalid_argument("grid arrays must hold M*N*P values");
    MachineState st;
    st.gpr.fill(0);
    st.fpr.fill({0.0, 0.0});
    st.memory.assign(l.words, 0.0);
    auto q = packed_weights(kernel.spec, kernel.weights);
    for (int n = 0; n < 4; ++n) {
        st.memory[2 * n] = q[n].first;
        st.memory[2 * n + 1] = q[n].second;
    }
    std::copy(a.begin(), a.end(), st.memory.begin() + static_cast<long>(l.a_base / 8));
    std::copy(r.begin(), r.end(), st.memory.begin() + static_cast<long>(l.r_base / 8));
    return st;
}

std::vector<double> read_result(const MachineState& state, const KernelProgram& kernel) {
    const auto& l = kernel.layout;
    auto first = state.memory.begin() + static_cast<long>(l.r_base / 8);
    return {first, first + static_cast<long>(l.grid_words)};
}

}  // namespace ppc450
