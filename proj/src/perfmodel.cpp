#include "ppc450/perfmodel.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <sstream>
#include <stdexcept>

#include "ppc450/memory_model.hpp"
#include "ppc450/pipeline.hpp"
#include "ppc450/verify.hpp"

namespace ppc450 {

double naive_limit(const KernelPlan& plan, const MachineConfig& config) {
    const int cycles = std::max(plan.lsu_cycles(), plan.fpu_cycles);
    return config.clock_hz * plan.stencils_per_iteration / cycles / 1e6;
}

Utilization utilization(const KernelPlan& plan) {
    const double cycles = std::max(plan.lsu_cycles(), plan.fpu_cycles);
    return {100.0 * plan.lsu_cycles() / cycles, 100.0 * plan.fpu_cycles / cycles};
}

std::string_view bandwidth_tier_name(BandwidthTier tier) {
    switch (tier) {
        case BandwidthTier::L1: return "l1";
        case BandwidthTier::L3: return "l3";
        case BandwidthTier::Stream: return "stream";
    }
    return "?";
}

double bandwidth_limit(const KernelPlan& plan, BandwidthTier tier, const MachineConfig& config) {
    const double read_bw = tier == BandwidthTier::L1   ? config.read_bw_l1
                           : tier == BandwidthTier::L3 ? config.read_bw_l3
                                                       : config.read_bw_dram;
    const double read_bytes = 16.0 * plan.frame / plan.stencils_per_iteration;
    const double write_bytes = 16.0 * plan.outputs / plan.stencils_per_iteration;
    const double cycles = read_bytes / read_bw + write_bytes / config.write_bw;
    return config.clock_hz / cycles / 1e6;
}

Prediction predict(const KernelPlan& plan, double simulated, const MachineConfig& config) {
    return {simulated, std::min(simulated, bandwidth_limit(plan, BandwidthTier::Stream, config))};
}

SteadyState simulate_steady_state(const StencilSpec& spec, const MachineConfig& config) {
    // Smallest grid around one jammed column whose k-loop runs long enough
    // for the boundary delta to settle.
    StencilSpec s = spec;
    s.M = s.i_jam + 2;
    s.N = s.j_jam + 2;
    s.P = 2 + 2 * 2 * 8;
    KernelProgram kernel = schedule_kernel(generate_kernel(s, WeightSet::random(s.arity, 1), config), config);
    GridPair grids = make_grids(s, 1);
    MemoryModel memory(Tier::L1, config);
    const long cycles = steady_state_cycles(kernel.instructions, kernel.body_end - 1, config, memory,
                                            initial_state(kernel, grids.a, grids.r));
    SteadyState out;
    out.cycles_per_iteration = static_cast<double>(cycles) / kernel.steps_per_body;
    out.throughput = config.clock_hz * kernel.plan.stencils_per_iteration / out.cycles_per_iteration / 1e6;
    return out;
}

std::vector<PerfReport> report_tables(const std::vector<StencilSpec>& specs, const MachineConfig& config) {
    std::vector<std::future<PerfReport>> jobs;
    for (const auto& spec : specs)
        jobs.push_back(std::async(std::launch::async, [spec, config] {
            const KernelPlan plan = plan_kernel(spec, config);
            const SteadyState ss = simulate_steady_state(spec, config);
            const Utilization u = utilization(plan);
            const Prediction p = predict(plan, ss.throughput, config);
            PerfReport r;
            r.config = spec.name();
            r.naive = naive_limit(plan, config);
            r.simulated = ss.throughput;
            r.bw_l1 = bandwidth_limit(plan, BandwidthTier::L1, config);
            r.bw_l3 = bandwidth_limit(plan, BandwidthTier::L3, config);
            r.bw_stream = bandwidth_limit(plan, BandwidthTier::Stream, config);
            r.pred_l1 = p.in_l1;
            r.pred_stream = p.streaming;
            r.util_ldst = u.ldst;
            r.util_fpu = u.fpu;
            r.bytes_per_stencil = plan.bytes_per_stencil;
            return r;
        }));

    std::vector<PerfReport> rows;
    std::string errors;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            rows.push_back(jobs[i].get());
        } catch (const std::exception& e) {
            errors += specs[i].name() + ": " + e.what() + "\n";
        }
    }
    if (!errors.empty()) throw std::runtime_error("report failed for:\n" + errors);
    return rows;
}

namespace {

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::vector<std::string> cells(const PerfReport& r) {
    return {r.config,        fixed(r.naive),       fixed(r.simulated),   fixed(r.bw_l1),
            fixed(r.bw_l3),  fixed(r.bw_stream),   fixed(r.pred_l1),     fixed(r.pred_stream),
            fixed(r.util_ldst, 1), fixed(r.util_fpu, 1), fixed(r.bytes_per_stencil, 2)};
}

const std::vector<std::string> kColumns = {"config",  "naive",       "simulated", "bw_l1",    "bw_l3",
                                           "bw_stream", "pred_l1",   "pred_stream", "util_ldst", "util_fpu",
                                           "bytes_per_stencil"};

}  // namespace

std::string report_csv(const std::vector<PerfReport>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < kColumns.size(); ++i) os << (i ? "," : "") << kColumns[i];
    os << '\n';
    for (const auto& r : rows) {
        auto c = cells(r);
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
        os << '\n';
    }
    return os.str();
}

std::string report_markdown(const std::vector<PerfReport>& rows) {
    std::ostringstream os;
    os << '|';
    for (const auto& c : kColumns) os << ' ' << c << " |";
    os << "\n|";
    for (std::size_t i = 0; i < kColumns.size(); ++i) os << (i ? " ---: |" : " --- |");
    os << '\n';
    for (const auto& r : rows) {
        os << '|';
        for (const auto& c : cells(r)) os << ' ' << c << " |";
        os << '\n';
    }
    return os.str();
}

}  // namespace ppc450
