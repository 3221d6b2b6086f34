#include "doctest.h"
#include "oracles.hpp"
#include "ppc450/verify.hpp"

using namespace ppc450;

TEST_SUITE("verify") {

TEST_CASE("reference agrees with the naive triple loop") {
    for (int arity : {3, 7, 27}) {
        StencilSpec s;
        s.arity = arity;
        s.M = s.N = s.P = 5;
        auto w = WeightSet::random(arity, 17);
        auto g = make_grids(s, 3);
        auto ref = reference_stencil(g.a, w, s, g.r);
        auto naive = oracle::naive_stencil(g.a, w, s, g.r);
        auto rep = compare_grids(s, ref, naive, g.r);
        CAPTURE(arity);
        CHECK(rep.pass);
        CHECK(rep.compared == 27);
    }
}

TEST_CASE("degenerate weights") {
    StencilSpec s;
    s.arity = 27;
    s.M = s.N = s.P = 6;
    auto g = make_grids(s, 1);
    auto zero = reference_stencil(g.a, WeightSet{}, s, g.r);
    auto copy = reference_stencil(g.a, WeightSet::identity(), s, g.r);
    for (int i = 1; i < 5; ++i)
        for (int j = 1; j < 5; ++j)
            for (int k = 1; k < 5; ++k) {
                const std::size_t idx = (i * 6 + j) * 6 + k;
                CHECK(zero[idx] == 0.0);
                CHECK(copy[idx] == g.a[idx]);
            }
    CHECK(zero[0] == g.r[0]);
}

TEST_CASE("generated kernels match the naive oracle") {
    for (const auto& spec : table_specs()) {
        auto w = WeightSet::random(spec.arity, 5);
        auto k = schedule_kernel(generate_kernel(spec, w));
        auto g = make_grids(spec, 5);
        auto got = read_result(run_program(k.instructions, initial_state(k, g.a, g.r), 50'000'000), k);
        auto rep = compare_grids(spec, got, oracle::naive_stencil(g.a, w, spec, g.r), g.r);
        CAPTURE(spec.name());
        CHECK(rep.pass);
    }
}

TEST_CASE("verify_kernel passes on the documented cases") {
    CHECK(verify_kernel(parse_spec_name("3-lc-2x2"), WeightSet::random(3, 0), 0).pass);
    auto s = parse_spec_name("27-mm-2x3");
    s.M = s.N = s.P = 26;
    auto rep = verify_kernel(s, WeightSet::random(27, 9), 9);
    CHECK(rep.pass);
    CHECK(rep.boundary_intact);
}

TEST_CASE("corruption is detected") {
    auto spec = parse_spec_name("7-mm-2x3");
    auto k = schedule_kernel(generate_kernel(spec, WeightSet::random(7, 2)));
    // Swap one weight-half selector.
    for (auto& in : k.instructions)
        if (in.op == Opcode::FMA_CP) {
            in.op = Opcode::FMA_CS;
            break;
        }
    auto rep = verify_program(k, 2);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_rel_error > kVerifyTolerance);
    CHECK_FALSE(rep.worst.empty());
    CHECK(rep.summary().find("FAIL") != std::string::npos);
    CHECK(rep.worst_csv().rfind("i,j,k,got,want,rel_error\n", 0) == 0);
}

TEST_CASE("boundary writes are detected") {
    StencilSpec s;
    s.M = s.N = s.P = 5;
    auto g = make_grids(s, 1);
    auto want = reference_stencil(g.a, WeightSet::identity(), s, g.r);
    auto got = want;
    got[0] += 1.0;
    auto rep = compare_grids(s, got, want, g.r);
    CHECK_FALSE(rep.boundary_intact);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("grids are seeded deterministically") {
    StencilSpec s;
    auto a = make_grids(s, 42), b = make_grids(s, 42), c = make_grids(s, 43);
    CHECK(a.a == b.a);
    CHECK(a.r == b.r);
    CHECK(a.a != c.a);
    CHECK(a.a != a.r);
}

}
