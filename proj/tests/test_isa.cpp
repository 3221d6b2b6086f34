#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ppc450/isa.hpp"

using namespace ppc450;
using oracle::make;

TEST_SUITE("isa") {

TEST_CASE("resource table") {
    MachineConfig c;
    CHECK(instruction_resource(Opcode::FMA_CP, c) == Resource{Unit::FPU, 1, 5});
    CHECK(instruction_resource(Opcode::LDQ, c) == Resource{Unit::LSU, 2, 4});
    CHECK(instruction_resource(Opcode::STQ, c).occupancy == 2);
    CHECK(instruction_resource(Opcode::ADDI, c) == Resource{Unit::IU, 2, 1});
    CHECK(unit_of(Opcode::LOOPDEC) == Unit::IU);
    CHECK(is_load(Opcode::LDS));
    CHECK_FALSE(is_load(Opcode::STQ));
    CHECK(is_memory(Opcode::STQ));
}

TEST_CASE("opcode names round-trip") {
    for (Opcode op : kAllOpcodes) CHECK(parse_opcode(opcode_name(op)) == op);
    CHECK_FALSE(parse_opcode("FDIV").has_value());
}

TEST_CASE("packed arithmetic semantics") {
    MachineState s;
    s.fpr[1] = {2.0, 3.0};   // weights
    s.fpr[2] = {5.0, 7.0};   // data
    s.fpr[3] = {1.0, -1.0};  // accumulator

    CHECK(execute(s, make(0, Opcode::FMUL_CP, 4, 1, 2)).fpr[4] == FprPair{10.0, 14.0});
    CHECK(execute(s, make(0, Opcode::FMUL_CS, 4, 1, 2)).fpr[4] == FprPair{15.0, 21.0});
    CHECK(execute(s, make(0, Opcode::FMUL_CX, 4, 1, 2)).fpr[4] == FprPair{21.0, 15.0});
    CHECK(execute(s, make(0, Opcode::FMA_CP, 3, 1, 2)).fpr[3] == FprPair{11.0, 13.0});
    CHECK(execute(s, make(0, Opcode::FMA_CS, 3, 1, 2)).fpr[3] == FprPair{16.0, 20.0});
    CHECK(execute(s, make(0, Opcode::FMA_CX, 3, 1, 2)).fpr[3] == FprPair{22.0, 14.0});
    CHECK(execute(s, make(0, Opcode::FMOV_P, 3, 2, 0)).fpr[3] == FprPair{5.0, -1.0});
    CHECK(execute(s, make(0, Opcode::FMOV_S, 3, 2, 0)).fpr[3] == FprPair{1.0, 7.0});
}

TEST_CASE("fused multiply-add rounds once") {
    MachineState s;
    const double x = 1.0 + std::ldexp(1.0, -30);
    s.fpr[1] = {x, x};
    s.fpr[2] = {x, x};
    s.fpr[3] = {-1.0, -1.0};
    auto r = execute(s, make(0, Opcode::FMA_CP, 3, 1, 2)).fpr[3];
    CHECK(r.p == std::fma(x, x, -1.0));
    CHECK(r.p != x * x - 1.0);
}

TEST_CASE("loads and stores") {
    MachineState s(8);
    for (int i = 0; i < 8; ++i) s.memory[i] = 10.0 + i;
    s.gpr[1] = 16;
    s.gpr[2] = 8;
    s.fpr[5] = {-1.0, -2.0};

    CHECK(execute(s, make(0, Opcode::LDQ, 5, 1, 0)).fpr[5] == FprPair{12.0, 13.0});
    CHECK(execute(s, make(0, Opcode::LDP, 5, 1, 2)).fpr[5] == FprPair{13.0, -2.0});
    CHECK(execute(s, make(0, Opcode::LDS, 5, 1, 2)).fpr[5] == FprPair{-1.0, 13.0});
    auto st = execute(s, make(0, Opcode::STQ, 5, 1, 0));
    CHECK(st.memory[2] == -1.0);
    CHECK(st.memory[3] == -2.0);
    CHECK(st.memory[4] == 14.0);
}

TEST_CASE("faults") {
    MachineState s(8);
    s.gpr[1] = 8;
    CHECK_THROWS_AS(execute(s, make(7, Opcode::LDQ, 1, 1, 0)), ExecutionFault);
    s.gpr[1] = 64;
    CHECK_THROWS_AS(execute(s, make(7, Opcode::LDP, 1, 1, 0)), ExecutionFault);
    try {
        s.gpr[1] = 8;
        execute(s, make(7, Opcode::STQ, 1, 1, 0));
    } catch (const ExecutionFault& e) {
        CHECK(e.instr_id() == 7);
    }
}

TEST_CASE("integer ops and loop control") {
    MachineState s;
    s.gpr[2] = 100;
    CHECK(execute(s, make(0, Opcode::ADDI, 3, 2, 0, -1, -16)).gpr[3] == 84u);

    // r1 = 3; body ADDI r2 += 1; LOOPDEC r1 -> 0
    Program p = {make(0, Opcode::ADDI, 2, 2, 0, -1, 1), make(1, Opcode::LOOPDEC, 1, 0, 0, -1, 0)};
    MachineState init;
    init.gpr[1] = 3;
    RunStats stats;
    auto out = run_program(p, init, 100, &stats);
    CHECK(out.gpr[2] == 3u);
    CHECK(out.gpr[1] == 0u);
    CHECK(stats.executed == 6);

    init.gpr[1] = 1000;
    CHECK_THROWS_AS(run_program(p, init, 50), ExecutionFault);
}

TEST_CASE("register sets") {
    auto fma = make(0, Opcode::FMA_CP, 3, 1, 2);
    CHECK(writes_of(fma) == std::vector<RegRef>{{RegFile::FPR, 3}});
    auto r = reads_of(fma);
    CHECK(r.size() == 3);  // weight, data, accumulator
    auto st = make(0, Opcode::STQ, 4, 1, 2);
    CHECK(writes_of(st).empty());
    CHECK(reads_of(st).size() == 3);
    CHECK(is_partial_write(Opcode::LDP));
    CHECK(is_partial_write(Opcode::FMOV_S));
    CHECK_FALSE(is_partial_write(Opcode::LDQ));
}

TEST_CASE("listing round-trip") {
    Program p = {make(0, Opcode::LDQ, 1, 6, 0, 3), make(1, Opcode::FMA_CX, 2, 1, 4),
                 make(2, Opcode::ADDI, 6, 6, 0, -1, 16), make(3, Opcode::LOOPDEC, 3, 0, 0, -1, 0)};
    p[1].comment = "acc(0,1) += w * a";
    auto text = format_listing(p);
    auto back = parse_listing(text);
    CHECK(back == p);
    CHECK(format_listing(back) == text);
    CHECK_THROWS_AS(parse_instruction("FDIV f1, f2, f3", 0), std::invalid_argument);
    CHECK_THROWS_AS(parse_instruction("LDQ f1, r40, r0", 0), std::invalid_argument);
}

TEST_CASE("config validation") {
    MachineConfig c;
    CHECK_NOTHROW(c.validate());
    c.fpu_latency = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    MachineConfig d;
    d.l2_prefetch_depth = 0;
    CHECK_NOTHROW(d.validate());
    d.l2_prefetch_depth = 3;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

}
