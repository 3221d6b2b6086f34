// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "ppc450/golden.hpp"
#include "ppc450/perfmodel.hpp"
#include "ppc450/pipeline.hpp"
#include "ppc450/scheduler.hpp"
#include "ppc450/stencil.hpp"
#include "ppc450/verify.hpp"

using namespace ppc450;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void fail(std::string msg) {
        pass = false;
        notes.push_back("  fail: " + std::move(msg));
    }
    void note(std::string msg) { notes.push_back("  " + std::move(msg)); }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool within_rel(double got, double want, double tol) { return std::abs(got - want) <= tol * std::abs(want); }

Outcome plans() {
    Outcome o;
    auto golden = load_golden("table2");
    auto round1 = [](double v) { return std::round(v * 10) / 10; };
    for (const auto& spec : table_specs()) {
        const auto p = plan_kernel(spec);
        const std::map<std::string, double> got = {
            {"frame", p.frame},
            {"stencils_per_iteration", p.stencils_per_iteration},
            {"reg_input", p.reg_input},
            {"reg_result", p.reg_result},
            {"reg_weight", p.reg_weight},
            {"loads", p.loads},
            {"stores", p.stores},
            {"fpu_ops", p.fpu_ops},
            {"lsu_cycles_ld", p.lsu_cycles_ld},
            {"lsu_cycles_st", p.lsu_cycles_st},
            {"fpu_cycles", p.fpu_cycles},
            {"util_ldst", round1(p.util_ldst)},
            {"util_fpu", round1(p.util_fpu)},
            {"bytes_per_stencil", round1(p.bytes_per_stencil)},
        };
        for (const auto& [col, v] : got) {
            double want = golden.at(spec.name(), col);
            if (col == "bytes_per_stencil") want = round1(want);
            if (v != want) o.fail(fmt("%s %s: %g, expected %g", spec.name().c_str(), col.c_str(), v, want));
        }
    }
    return o;
}

Outcome naive_column() {
    Outcome o;
    auto golden = load_golden("table3");
    for (const auto& spec : table_specs()) {
        const double got = naive_limit(plan_kernel(spec));
        const double want = golden.at(spec.name(), "naive");
        if (std::abs(got - want) > 0.01) o.fail(fmt("%s: %.4f vs %.2f", spec.name().c_str(), got, want));
    }
    return o;
}

Outcome bandwidth_columns() {
    Outcome o;
    auto golden = load_golden("table3");
    for (const auto& spec : table_specs()) {
        const auto p = plan_kernel(spec);
        const double l1 = bandwidth_limit(p, BandwidthTier::L1);
        const double st = bandwidth_limit(p, BandwidthTier::Stream);
        const double want_l1 = golden.at(spec.name(), "bw_l1");
        const double want_st = golden.at(spec.name(), "bw_stream");
        if (!within_rel(l1, want_l1, 0.005)) o.fail(fmt("%s L1: %.2f vs %.2f", spec.name().c_str(), l1, want_l1));
        if (!within_rel(st, want_st, 0.005))
            o.fail(fmt("%s stream: %.2f vs %.2f", spec.name().c_str(), st, want_st));
    }
    const double lc = bandwidth_limit(plan_kernel(parse_spec_name("3-lc-2x2")), BandwidthTier::L3);
    const double mm = bandwidth_limit(plan_kernel(parse_spec_name("27-mm-2x3")), BandwidthTier::L3);
    o.note(fmt("L3 peaks: 3-point %.2f (265), 27-point %.2f (118)", lc, mm));
    if (!within_rel(lc, 265, 0.005)) o.fail("3-point L3 peak");
    if (!within_rel(mm, 118, 0.005)) o.fail("27-point L3 peak");
    return o;
}

Outcome simulated_column() {
    Outcome o;
    auto golden = load_golden("table3");
    const auto specs = table_specs();
    std::vector<std::future<SteadyState>> jobs;
    for (const auto& spec : specs)
        jobs.push_back(std::async(std::launch::async, [spec] { return simulate_steady_state(spec); }));
    std::map<std::string, double> ours, ref;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto name = specs[i].name();
        const auto ss = jobs[i].get();
        ours[name] = ss.throughput;
        ref[name] = golden.at(name, "simulated");
        const double ratio = ss.throughput / ref[name];
        o.note(fmt("%-10s %6.1f cycles  %7.2f vs %7.2f  ratio %.3f", name.c_str(), ss.cycles_per_iteration,
                   ss.throughput, ref[name], ratio));
        if (ratio < 0.8 || ratio > 1.2) o.fail(fmt("%s outside +-20%% (ratio %.3f)", name.c_str(), ratio));
    }
    // Within a family every pair keeps the reference order, except that pairs
    // within 5% of each other in the reference may also land within 5% here.
    const std::vector<std::vector<std::string>> families = {
        {"27-mm-1x1", "27-mm-1x2", "27-mm-1x3", "27-mm-2x2", "27-mm-2x3"},
        {"7-mm-2x3", "7-lc-2x3"},
        {"3-lc-1x1", "3-lc-2x1", "3-lc-2x2", "3-lc-2x3", "3-lc-2x4"},
    };
    for (const auto& fam : families)
        for (std::size_t a = 0; a < fam.size(); ++a)
            for (std::size_t b = a + 1; b < fam.size(); ++b) {
                const double pa = ref[fam[a]], pb = ref[fam[b]];
                const double oa = ours[fam[a]], ob = ours[fam[b]];
                const bool same_order = (pa < pb) == (oa < ob);
                const bool tie = within_rel(pa, pb, 0.05) && within_rel(oa, ob, 0.05);
                if (!same_order && !tie) o.fail(fmt("ranking %s vs %s", fam[a].c_str(), fam[b].c_str()));
            }
    return o;
}

Outcome functional() {
    Outcome o;
    std::vector<std::future<VerifyReport>> jobs;
    for (const auto& base : table_specs())
        for (int d : {14, 26, 38})
            for (std::uint64_t seed : {1, 2, 3}) {
                auto spec = base;
                spec.M = spec.N = spec.P = d;
                jobs.push_back(std::async(std::launch::async, [spec, seed] {
                    return verify_kernel(spec, WeightSet::random(spec.arity, seed), seed);
                }));
            }
    double worst = 0;
    for (auto& j : jobs) {
        auto r = j.get();
        worst = std::max(worst, r.max_rel_error);
        if (!r.pass) o.fail(r.summary());
    }
    o.note(fmt("%zu runs, max relative error %.3g", jobs.size(), worst));
    return o;
}

Outcome optimality() {
    Outcome o;
    SplitMix64 rng(4242);
    int gaps = 0;
    for (int t = 0; t < 200; ++t) {
        auto block = oracle::random_block(rng, 1 + t % 10, t % 2 == 0);
        const int optimum = oracle::brute_force_min_length(block);
        const auto e = schedule_exact(block);
        const auto g = schedule_greedy(block);
        const int lb = lower_bound(build_dag(block), block);
        if (!validate_schedule(e, block).empty() || !validate_schedule(g, block).empty())
            o.fail(fmt("block %d: invalid schedule", t));
        if (e.length != optimum) o.fail(fmt("block %d: exact %d, enumeration %d", t, e.length, optimum));
        if (!(g.length >= e.length && e.length >= lb))
            o.fail(fmt("block %d: greedy %d, exact %d, bound %d", t, g.length, e.length, lb));
        gaps += g.length > e.length;
    }
    o.note(fmt("greedy above optimum on %d of 200 blocks", gaps));
    return o;
}

Outcome preservation() {
    Outcome o;
    for (const auto& spec : table_specs()) {
        const auto k = generate_kernel(spec, WeightSet::random(spec.arity, 5));
        const auto s = schedule_kernel(k);
        const auto g = make_grids(spec, 5);
        const auto want = run_program(k.instructions, initial_state(k, g.a, g.r), 100'000'000);
        const auto got = run_program(s.instructions, initial_state(s, g.a, g.r), 100'000'000);
        if (!(got == want)) o.fail(spec.name());
    }
    SplitMix64 rng(99);
    for (int t = 0; t < 1000; ++t) {
        auto block = oracle::random_block(rng, 2 + t % 11, t % 3 == 0);
        const auto init = oracle::random_state(rng);
        const auto want = run_program(block, init, 1000);
        if (!(run_program(apply_schedule(block, schedule_greedy(block)), init, 1000) == want))
            o.fail(fmt("random block %d (greedy)", t));
        if (block.size() <= 10 && !(run_program(apply_schedule(block, schedule_exact(block)), init, 1000) == want))
            o.fail(fmt("random block %d (exact)", t));
    }
    return o;
}

std::map<int, long> first_issue(const SimTrace& t) {
    std::map<int, long> out;
    for (const auto& r : t.records) {
        if (r.slot_a >= 0) out.emplace(r.slot_a, r.cycle);
        if (r.slot_b >= 0) out.emplace(r.slot_b, r.cycle);
    }
    return out;
}

Outcome micro() {
    Outcome o;
    MachineConfig c;
    auto run = [&](const Program& p) {
        MemoryModel m(Tier::L1, c);
        return first_issue(simulate(p, c, m, MachineState(256)));
    };
    using oracle::make;
    auto fma = run({make(0, Opcode::FMA_CP, 1, 0, 2), make(1, Opcode::FMA_CP, 3, 0, 1)});
    o.note(fmt("dependent FMA spacing %ld", fma[1] - fma[0]));
    if (fma[1] - fma[0] != 5) o.fail("dependent FMA spacing");
    auto ld = run({make(0, Opcode::LDQ, 1, 1, 0), make(1, Opcode::LDQ, 2, 1, 0)});
    o.note(fmt("independent load spacing %ld", ld[1] - ld[0]));
    if (ld[1] - ld[0] != 2) o.fail("independent load spacing");
    auto dual = run({make(0, Opcode::FMA_CP, 1, 2, 3), make(1, Opcode::LDQ, 4, 1, 0)});
    if (dual[0] != dual[1]) o.fail("FPU and LSU did not share a cycle");

    MachineConfig np;
    np.l2_prefetch_depth = 0;
    const auto bw = effective_bandwidth(1, np);
    o.note(fmt("no-prefetch streaming %.3f B/cycle (%d misses, %d-cycle latency)", bw.bytes_per_cycle,
               np.max_outstanding_misses, np.load_latency_l1 + np.l3_penalty));
    if (std::abs(bw.bytes_per_cycle - 1.7) > 0.2) o.fail("streaming bandwidth");
    return o;
}

struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> only;
    bool verbose = false;
    app.add_option("--only", only, "run only these criteria");
    app.add_flag("-v,--verbose", verbose, "print details for passing criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all = {
        {1, "plan reproduction", 1, plans},
        {2, "naive instruction limits", 1, naive_column},
        {3, "bandwidth limits", 1, bandwidth_columns},
        {4, "simulated in-L1 throughput", 60, simulated_column},
        {5, "functional correctness", 120, functional},
        {6, "scheduler optimality", 300, optimality},
        {7, "semantic preservation", 120, preservation},
        {8, "pipeline micro-properties", 10, micro},
    };

    bool ok = true;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) out.fail(fmt("took %.2f s, budget %.0f s", secs, c.budget_s));
        std::printf("criterion %d: %s  %s  (%.2f s)\n", c.id, out.pass ? "PASS" : "FAIL", c.title, secs);
        if (verbose || !out.pass)
            for (const auto& n : out.notes) std::printf("%s\n", n.c_str());
        ok = ok && out.pass;
    }
    if (only.empty())
        std::printf("criterion 9: INFO  hardware observations, measured curves, and multi-core effects are "
                    "not reproducible here; kept in the golden files for display only\n");
    return ok ? 0 : 1;
}
