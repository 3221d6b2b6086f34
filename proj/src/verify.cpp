#include "ppc450/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ppc450/random.hpp"

namespace ppc450 {

GridPair make_grids(const StencilSpec& spec, std::uint64_t seed) {
    const std::size_t n = static_cast<std::size_t>(spec.M) * spec.N * spec.P;
    SplitMix64 rng(seed);
    SplitMix64 fill_a = rng.split(), fill_r = rng.split();
    GridPair g;
    g.a.resize(n);
    g.r.resize(n);
    for (auto& v : g.a) v = fill_a.symmetric_unit();
    for (auto& v : g.r) v = fill_r.symmetric_unit();
    return g;
}

std::vector<double> reference_stencil(std::span<const double> a, const WeightSet& weights, const StencilSpec& spec,
                                      std::vector<double> r) {
    const int M = spec.M, N = spec.N, P = spec.P;
    if (M < 3 || N < 3 || P < 3) throw std::invalid_argument("reference_stencil: every dimension must be >= 3");
    const std::size_t n = static_cast<std::size_t>(M) * N * P;
    if (a.size() != n || r.size() != n) throw std::invalid_argument("reference_stencil: grid size mismatch");
    auto at = [&](int i, int j, int k) { return a[(static_cast<std::size_t>(i) * N + j) * P + k]; };

    for (int i = 1; i < M - 1; ++i)
        for (int j = 1; j < N - 1; ++j)
            for (int k = 1; k < P - 1; ++k) {
                double acc = 0;
                bool first = true;
                auto term = [&](double w, double x) {
                    acc = first ? w * x : std::fma(w, x, acc);
                    first = false;
                };
                for (int dk = -1; dk <= 1; ++dk)
                    for (int di = -1; di <= 1; ++di)
                        for (int dj = -1; dj <= 1; ++dj) {
                            const int ai = std::abs(di), aj = std::abs(dj), ak = std::abs(dk);
                            bool used;
                            if (spec.arity == 27) used = true;
                            else if (spec.arity == 7) used = ai + aj + ak <= 1;
                            else used = ai + aj == 0;
                            if (used) term(weights.w[ai][aj][ak], at(i + di, j + dj, k + dk));
                        }
                r[(static_cast<std::size_t>(i) * N + j) * P + k] = acc;
            }
    return r;
}

VerifyReport compare_grids(const StencilSpec& spec, std::span<const double> got, std::span<const double> want,
                           std::span<const double> initial, std::size_t worst_count) {
    VerifyReport rep;
    rep.config = spec.name();
    std::vector<Mismatch> all;
    for (int i = 0; i < spec.M; ++i)
        for (int j = 0; j < spec.N; ++j)
            for (int k = 0; k < spec.P; ++k) {
                const std::size_t idx = (static_cast<std::size_t>(i) * spec.N + j) * spec.P + k;
                const bool interior = i > 0 && i < spec.M - 1 && j > 0 && j < spec.N - 1 && k > 0 && k < spec.P - 1;
                if (!interior) {
                    if (std::memcmp(&got[idx], &initial[idx], sizeof(double)) != 0) {
                        rep.boundary_intact = false;
                        all.push_back({i, j, k, got[idx], initial[idx], std::numeric_limits<double>::infinity()});
                    }
                    continue;
                }
                ++rep.compared;
                double err = std::abs(got[idx] - want[idx]) / std::max(std::abs(want[idx]), 1.0);
                if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
                rep.max_rel_error = std::max(rep.max_rel_error, err);
                if (err > 0) all.push_back({i, j, k, got[idx], want[idx], err});
            }
    std::sort(all.begin(), all.end(), [](const Mismatch& x, const Mismatch& y) { return x.rel_error > y.rel_error; });
    if (all.size() > worst_count) all.resize(worst_count);
    rep.worst = std::move(all);
    rep.pass = rep.boundary_intact && rep.max_rel_error <= kVerifyTolerance;
    return rep;
}

std::string VerifyReport::summary() const {
    std::ostringstream os;
    os << config << ": " << (pass ? "PASS" : "FAIL") << " max_rel_error=" << std::setprecision(3) << std::scientific
       << max_rel_error << " boundary=" << (boundary_intact ? "intact" : "MODIFIED") << " points=" << compared;
    return os.str();
}

std::string VerifyReport::worst_csv() const {
    std::ostringstream os;
    os << "i,j,k,got,want,rel_error\n" << std::setprecision(17);
    for (const auto& m : worst) os << m.i << ',' << m.j << ',' << m.k << ',' << m.got << ',' << m.want << ',' << m.rel_error << '\n';
    return os.str();
}

VerifyReport verify_program(const KernelProgram& kernel, std::uint64_t seed) {
    GridPair g = make_grids(kernel.spec, seed);
    MachineState st = initial_state(kernel, g.a, g.r);
    const std::size_t budget = 64 * kernel.instructions.size() * static_cast<std::size_t>(kernel.spec.M) *
                               kernel.spec.N * kernel.spec.P + 1000;
    st = run_program(kernel.instructions, std::move(st), budget);
    auto got = read_result(st, kernel);
    auto want = reference_stencil(g.a, kernel.weights, kernel.spec, g.r);
    return compare_grids(kernel.spec, got, want, g.r);
}

VerifyReport verify_kernel(const StencilSpec& spec, const WeightSet& weights, std::uint64_t seed,
                           const MachineConfig& config) {
    return verify_program(schedule_kernel(generate_kernel(spec, weights, config), config), seed);
}

}  // namespace ppc450
