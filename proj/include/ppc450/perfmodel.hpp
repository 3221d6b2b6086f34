#pragma once

#include <string>
#include <vector>

#include "ppc450/isa.hpp"
#include "ppc450/stencil.hpp"

namespace ppc450 {

// All throughputs are in Mstencil/s.
double naive_limit(const KernelPlan& plan, const MachineConfig& config = {});

struct Utilization {
    double ldst = 0;  // percent
    double fpu = 0;
};
Utilization utilization(const KernelPlan& plan);

enum class BandwidthTier { L1, L3, Stream };
std::string_view bandwidth_tier_name(BandwidthTier tier);

// Read traffic is one quad per input stream per iteration, write traffic one
// quad per output stream.
double bandwidth_limit(const KernelPlan& plan, BandwidthTier tier, const MachineConfig& config = {});

struct Prediction {
    double in_l1 = 0;
    double streaming = 0;
};
Prediction predict(const KernelPlan& plan, double simulated, const MachineConfig& config = {});

/// Steady-state loop cost of the scheduled kernel with every load hitting L1.
struct SteadyState {
    double cycles_per_iteration = 0;
    double throughput = 0;  // Mstencil/s
};
SteadyState simulate_steady_state(const StencilSpec& spec, const MachineConfig& config = {});

struct PerfReport {
    std::string config;
    double naive = 0;
    double simulated = 0;
    double bw_l1 = 0;
    double bw_l3 = 0;
    double bw_stream = 0;
    double pred_l1 = 0;
    double pred_stream = 0;
    double util_ldst = 0;
    double util_fpu = 0;
    double bytes_per_stencil = 0;
};

// One row per spec in input order; simulations run concurrently. Per-spec
// failures are collected and rethrown together as std::runtime_error.
std::vector<PerfReport> report_tables(const std::vector<StencilSpec>& specs, const MachineConfig& config = {});

std::string report_csv(const std::vector<PerfReport>& rows);
std::string report_markdown(const std::vector<PerfReport>& rows);

}  // namespace ppc450
