// stencilsynth: generate, schedule, simulate, verify and report stencil kernels.
//
// Exit codes: 0 ok, 1 other failure, 2 usage, 3 invalid spec, 4 infeasible
// schedule limits, 5 verification failure, 6 execution fault.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ppc450/golden.hpp"
#include "ppc450/perfmodel.hpp"
#include "ppc450/pipeline.hpp"
#include "ppc450/scheduler.hpp"
#include "ppc450/stencil.hpp"
#include "ppc450/verify.hpp"

using namespace ppc450;

namespace {

constexpr const char* kConfigEnv = "STENCILSYNTH_CONFIG";

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kInvalidSpec = 3, kInfeasible = 4, kVerifyFail = 5, kFault = 6 };

struct StageError : std::runtime_error {
    StageError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
    int code;
};

struct Options {
    std::string config_path;
    std::optional<int> stencil;
    std::optional<std::string> kernel;
    std::optional<std::string> unroll;
    std::optional<std::string> dims;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> tier;
    bool optimistic = false;
    bool conservative = false;
    std::string out;
    std::string format;
    std::string input;
    std::string trace;
    bool exact = false;
    std::optional<int> gpr_max, fpr_max;
    int block = -1;
    bool all = false;
    std::size_t step_limit = 100'000'000;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError(kOther, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_output(const Options& o, const std::string& text) {
    if (o.out.empty() || o.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(o.out, std::ios::binary);
    if (!out) throw StageError(kOther, "cannot write " + o.out);
    out << text;
}

// Resolved run settings: config file (explicit or from the environment)
// first, then flags.
struct Resolved {
    StencilSpec spec;
    std::uint64_t seed = 0;
    Tier tier = Tier::L1;
    MachineConfig machine;
};

Resolved resolve(const Options& o) {
    Resolved r;
    std::string path = o.config_path;
    if (path.empty())
        if (const char* env = std::getenv(kConfigEnv)) path = env;
    std::string spec_lines;
    if (!path.empty()) {
        std::istringstream in(read_file(path));
        std::string line;
        while (std::getline(in, line)) {
            auto eq = line.find('=');
            std::string key = eq == std::string::npos ? "" : line.substr(0, eq);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t") + 1);
            std::string value = eq == std::string::npos ? "" : line.substr(eq + 1);
            value.erase(0, value.find_first_not_of(" \t"));
            value.erase(value.find_last_not_of(" \t\r") + 1);
            if (key == "seed") {
                r.seed = std::stoull(value);
            } else if (key == "tier") {
                r.tier = parse_tier(value);
            } else if (key == "optimistic_prefetch") {
                r.machine.optimistic_prefetch = value == "1" || value == "true";
            } else {
                spec_lines += line + '\n';
            }
        }
    }
    r.spec = parse_spec_config(spec_lines);
    std::string flags;
    if (o.stencil) flags += "stencil=" + std::to_string(*o.stencil) + "\n";
    if (o.kernel) flags += "kernel=" + *o.kernel + "\n";
    if (o.unroll) flags += "unroll=" + *o.unroll + "\n";
    if (o.dims) flags += "dims=" + *o.dims + "\n";
    r.spec = parse_spec_config(flags, r.spec);
    if (o.seed) r.seed = *o.seed;
    if (o.tier) r.tier = parse_tier(*o.tier);
    if (o.optimistic) r.machine.optimistic_prefetch = true;
    if (o.conservative) r.machine.optimistic_prefetch = false;
    r.spec.validate();
    return r;
}

KernelProgram load_or_generate(const Options& o, const Resolved& r, bool schedule) {
    if (!o.input.empty()) return parse_kernel_listing(read_file(o.input), r.machine);
    KernelProgram k = generate_kernel(r.spec, WeightSet::random(r.spec.arity, r.seed), r.machine);
    return schedule ? schedule_kernel(std::move(k), r.machine) : k;
}

std::string plan_header(const KernelPlan& p) {
    std::ostringstream os;
    os << ";; plan frame " << p.frame << " stencils " << p.stencils_per_iteration << " registers " << p.reg_input << '-'
       << p.reg_result << '-' << p.reg_weight << " loads " << p.loads << " stores " << p.stores << " fpu " << p.fpu_ops
       << " cycles " << p.lsu_cycles_ld << '-' << p.lsu_cycles_st << '-' << p.fpu_cycles << '\n';
    return os.str();
}

int run_gen(const Options& o) {
    Resolved r = resolve(o);
    KernelProgram k = load_or_generate(o, r, false);
    std::string format = o.format.empty() ? "listing" : o.format;
    if (format == "listing") {
        write_output(o, plan_header(k.plan) + kernel_listing(k));
    } else if (format == "inline-c" || format == "inline-c-template") {
        write_output(o, emit_assembly(k.instructions, EmitStyle::InlineC, "stencil_" + std::to_string(k.spec.arity) +
                                                                              "_" + (k.spec.kernel == SubKernel::MM ? "mm" : "lc")));
    } else {
        throw StageError(kUsage, "gen: unsupported --format " + format + " (listing|inline-c)");
    }
    return kOk;
}

int run_sched(const Options& o) {
    // A plain listing without a kernel header is scheduled as one block.
    if (!o.input.empty()) {
        std::string text = read_file(o.input);
        if (text.find(";; spec") == std::string::npos) {
            Program block = parse_listing(text);
            MachineConfig machine;
            Schedule s = o.exact ? schedule_exact(block, machine, {o.gpr_max, o.fpr_max}) : schedule_greedy(block, machine);
            if (o.format == "listing")
                write_output(o, format_listing(apply_schedule(block, s)));
            else
                write_output(o, schedule_csv(s, block));
            std::cerr << "length " << s.length << '\n';
            return kOk;
        }
    }
    Resolved r = resolve(o);
    KernelProgram k = load_or_generate(o, r, false);
    std::ostringstream csv;
    csv << "block,cycle,instr_id,opcode\n";
    for (std::size_t b = 0; b < k.step_ranges.size(); ++b) {
        if (o.block >= 0 && static_cast<int>(b) != o.block) continue;
        auto [begin, end] = k.step_ranges[b];
        std::span<const Instruction> block(k.instructions.data() + begin, end - begin);
        Schedule s = o.exact ? schedule_exact(block, r.machine, {o.gpr_max, o.fpr_max}) : schedule_greedy(block, r.machine);
        for (const auto& e : s.entries)
            csv << b << ',' << e.cycle << ',' << e.id << ',' << opcode_name(block[e.position].op) << '\n';
        Program ordered = apply_schedule(block, s);
        std::copy(ordered.begin(), ordered.end(), k.instructions.begin() + begin);
    }
    if (o.format == "listing")
        write_output(o, plan_header(k.plan) + kernel_listing(k));
    else if (o.format.empty() || o.format == "csv")
        write_output(o, csv.str());
    else
        throw StageError(kUsage, "sched: unsupported --format " + o.format + " (csv|listing)");
    return kOk;
}

int run_sim(const Options& o) {
    Resolved r = resolve(o);
    KernelProgram k = load_or_generate(o, r, true);
    GridPair g = make_grids(k.spec, r.seed);
    MachineState init = initial_state(k, g.a, g.r);

    MemoryModel full_memory(r.tier, r.machine);
    SimOptions opts;
    opts.step_limit = o.step_limit;
    opts.record_trace = !o.trace.empty() || (o.format == "csv");
    SimTrace t = simulate(k.instructions, r.machine, full_memory, init, opts);

    MemoryModel loop_memory(r.tier, r.machine);
    long loop = steady_state_cycles(k.instructions, k.body_end - 1, r.machine, loop_memory, init);
    double per_iteration = static_cast<double>(loop) / k.steps_per_body;
    const long interior = static_cast<long>(k.spec.M - 2) * (k.spec.N - 2) * (k.spec.P - 2);

    std::ostringstream os;
    os << "config: " << k.spec.name() << ' ' << k.spec.M << 'x' << k.spec.N << 'x' << k.spec.P << '\n';
    os << "tier: " << tier_name(r.tier) << '\n';
    os << "cycles_per_iteration: " << per_iteration << '\n';
    os << "steady_state_mstencil_s: " << r.machine.clock_hz * k.plan.stencils_per_iteration / per_iteration / 1e6 << '\n';
    os << "whole_run_mstencil_s: " << r.machine.clock_hz * interior / t.cycles / 1e6 << '\n';
    os << trace_summary(t);
    if (!o.trace.empty()) {
        std::ofstream out(o.trace);
        if (!out) throw StageError(kOther, "cannot write " + o.trace);
        out << trace_csv(t);
    }
    if (o.format == "csv")
        write_output(o, trace_csv(t)), std::cerr << os.str();
    else
        write_output(o, os.str());
    return kOk;
}

int run_verify(const Options& o) {
    Resolved r = resolve(o);
    KernelProgram k = load_or_generate(o, r, true);
    VerifyReport rep = verify_program(k, r.seed);
    write_output(o, o.format == "csv" ? rep.worst_csv() : rep.summary() + "\n");
    if (!rep.pass) throw StageError(kVerifyFail, "verify: " + rep.summary());
    return kOk;
}

int run_report(const Options& o) {
    std::vector<StencilSpec> specs;
    MachineConfig machine;
    if (o.all) {
        specs = table_specs();
    } else {
        Resolved r = resolve(o);
        specs.push_back(r.spec);
        machine = r.machine;
    }
    auto rows = report_tables(specs, machine);
    std::string format = o.format.empty() ? "csv" : o.format;
    if (format == "csv")
        write_output(o, report_csv(rows));
    else if (format == "markdown")
        write_output(o, report_markdown(rows));
    else
        throw StageError(kUsage, "report: unsupported --format " + format + " (csv|markdown)");
    return kOk;
}

void add_spec_flags(CLI::App* app, Options& o) {
    app->add_option("--config", o.config_path, std::string("key=value spec file (default $") + kConfigEnv + ")");
    app->add_option("--stencil", o.stencil, "stencil arity: 3, 7 or 27");
    app->add_option("--kernel", o.kernel, "sub-kernel: mm or lc");
    app->add_option("--unroll", o.unroll, "unroll-and-jam factors IxJ");
    app->add_option("--dims", o.dims, "grid dims MxNxP or a single edge length");
    app->add_option("--seed", o.seed, "seed for weights and grids");
    app->add_option("--out", o.out, "output file (default stdout)");
    app->add_option("--format", o.format, "output format");
    app->add_option("--input", o.input, "kernel listing to load instead of generating");
    app->add_flag("--optimistic-prefetch", o.optimistic, "allocate prefetch streams on the first miss");
    app->add_flag("--conservative-prefetch", o.conservative, "allocate streams on consecutive-line misses");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stencil kernel synthesis, scheduling and simulation toolkit"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen", "emit kernel assembly and its plan");
    add_spec_flags(gen, o);
    auto* sched = app.add_subcommand("sched", "schedule kernel step blocks, emit CSV or a listing");
    add_spec_flags(sched, o);
    sched->add_flag("--exact", o.exact, "branch-and-bound instead of the list scheduler");
    sched->add_option("--gpr-max", o.gpr_max, "GPR limit for --exact");
    sched->add_option("--fpr-max", o.fpr_max, "FPR limit for --exact");
    sched->add_option("--block", o.block, "only this step block");
    auto* sim = app.add_subcommand("sim", "cycle-accurate simulation");
    add_spec_flags(sim, o);
    sim->add_option("--tier", o.tier, "memory tier: l1|l3|stream|full");
    sim->add_option("--trace", o.trace, "write the per-cycle trace CSV here");
    sim->add_option("--step-limit", o.step_limit, "instruction budget");
    auto* ver = app.add_subcommand("verify", "compare against the scalar reference");
    add_spec_flags(ver, o);
    auto* rep = app.add_subcommand("report", "analytic and simulated throughput tables");
    add_spec_flags(rep, o);
    rep->add_flag("--all", o.all, "all table configurations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (stage == "gen") return run_gen(o);
        if (stage == "sched") return run_sched(o);
        if (stage == "sim") return run_sim(o);
        if (stage == "verify") return run_verify(o);
        return run_report(o);
    } catch (const StageError& e) {
        std::cerr << stage << ": " << e.what() << '\n';
        return e.code;
    } catch (const InvalidSpec& e) {
        std::cerr << stage << ": invalid spec: " << e.what() << '\n';
        return kInvalidSpec;
    } catch (const ScheduleError& e) {
        std::cerr << stage << ": " << e.what() << '\n';
        return e.kind() == ScheduleError::Kind::Infeasible ? kInfeasible : kOther;
    } catch (const ExecutionFault& e) {
        std::cerr << stage << ": execution fault: " << e.what() << '\n';
        return kFault;
    } catch (const std::exception& e) {
        std::cerr << stage << ": " << e.what() << '\n';
        return kOther;
    }
}
