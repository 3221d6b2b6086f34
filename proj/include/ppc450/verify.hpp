#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ppc450/stencil.hpp"

namespace ppc450 {

// Input and output grids, M*N*P each, flattened (i*N + j)*P + k.
struct GridPair {
    std::vector<double> a;
    std::vector<double> r;
};

// A filled with seeded values in [-1, 1]; R pre-filled with a different
// seeded sequence so untouched entries are detectable.
GridPair make_grids(const StencilSpec& spec, std::uint64_t seed);

// Interior points only; `r` supplies the untouched boundary. Each output
// accumulates its neighbors in (dk, di, dj) lexicographic order: the first
// term is a product, later ones fused multiply-adds.
std::vector<double> reference_stencil(std::span<const double> a, const WeightSet& weights, const StencilSpec& spec,
                                      std::vector<double> r);

struct Mismatch {
    int i = 0, j = 0, k = 0;
    double got = 0, want = 0, rel_error = 0;
};

struct VerifyReport {
    std::string config;
    bool pass = false;
    double max_rel_error = 0;
    bool boundary_intact = true;
    long compared = 0;
    std::vector<Mismatch> worst;  // largest errors first

    std::string summary() const;
    std::string worst_csv() const;  // i,j,k,got,want,rel_error
};

inline constexpr double kVerifyTolerance = 1e-12;

// Compares `got` with `want` on the interior and with `initial` on the
// boundary. Relative error uses max(|want|, 1) as denominator.
VerifyReport compare_grids(const StencilSpec& spec, std::span<const double> got, std::span<const double> want,
                           std::span<const double> initial, std::size_t worst_count = 10);

// Runs a (possibly scheduled or edited) kernel on seeded grids and checks it
// against the reference. Execution faults propagate.
VerifyReport verify_program(const KernelProgram& kernel, std::uint64_t seed);

// Generates, schedules and verifies a kernel.
VerifyReport verify_kernel(const StencilSpec& spec, const WeightSet& weights, std::uint64_t seed,
                           const MachineConfig& config = {});

}  // namespace ppc450
