#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ppc450/stencil.hpp"

namespace ppc450 {

namespace {

std::string escape_c(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string emit_assembly(std::span<const Instruction> program, EmitStyle style, const std::string& function_name) {
    if (style == EmitStyle::Listing) return format_listing(program);

    std::ostringstream os;
    os << "/* generated for the ppc450 model ISA; not host-executable */\n";
    os << "void " << function_name << "(const double* a, double* r, const double* w) {\n";
    os << "    (void)a; (void)r; (void)w;\n";
    for (std::size_t pc = 0; pc < program.size(); ++pc) {
        const Instruction& in = program[pc];
        Instruction bare = in;
        bare.comment.clear();
        bare.stream = -1;
        os << "L" << pc << ": __asm__ volatile(\"" << escape_c(format_instruction(bare)) << "\");";
        if (in.stream >= 0 || !in.comment.empty()) {
            os << "  /*";
            if (in.stream >= 0) os << " s" << in.stream;
            if (!in.comment.empty()) os << ' ' << in.comment;
            os << " */";
        }
        os << '\n';
    }
    os << "}\n";
    return os.str();
}

std::string kernel_listing(const KernelProgram& kernel) {
    std::ostringstream os;
    const StencilSpec& sp = kernel.spec;
    os << ";; spec " << sp.name() << ' ' << sp.M << 'x' << sp.N << 'x' << sp.P << '\n';
    os << ";; body " << kernel.body_begin << ' ' << kernel.body_end << " steps " << kernel.steps_per_body << '\n';
    for (const auto& [b, e] : kernel.step_ranges) os << ";; step " << b << ' ' << e << '\n';
    os << ";; weights";
    for (int dk = 0; dk < 2; ++dk)
        for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj) {
                std::ostringstream v;
                v.precision(17);
                v << kernel.weights.w[dk][di][dj];
                os << ' ' << v.str();
            }
    os << '\n';
    os << format_listing(kernel.instructions);
    return os.str();
}

KernelProgram parse_kernel_listing(const std::string& text, const MachineConfig& config) {
    std::optional<StencilSpec> spec;
    std::optional<WeightSet> weights;
    std::size_t body_begin = 0, body_end = 0;
    int steps = 0;
    bool have_body = false;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(";;", 0) != 0) continue;
        std::istringstream fields(line.substr(2));
        std::string key;
        fields >> key;
        if (key == "spec") {
            std::string name, dims;
            if (!(fields >> name >> dims)) throw std::invalid_argument("malformed spec header: " + line);
            StencilSpec s = parse_spec_name(name);
            spec = parse_spec_config("dims=" + dims, s);
        } else if (key == "body") {
            std::string word;
            if (!(fields >> body_begin >> body_end >> word >> steps) || word != "steps")
                throw std::invalid_argument("malformed body header: " + line);
            have_body = true;
        } else if (key == "step") {
            std::size_t b = 0, e = 0;
            if (!(fields >> b >> e)) throw std::invalid_argument("malformed step header: " + line);
            ranges.emplace_back(b, e);
        } else if (key == "weights") {
            WeightSet w = WeightSet::identity();
            for (int dk = 0; dk < 2; ++dk)
                for (int di = 0; di < 2; ++di)
                    for (int dj = 0; dj < 2; ++dj)
                        if (!(fields >> w.w[dk][di][dj])) throw std::invalid_argument("malformed weights header");
            weights = w;
        }
    }
    if (!spec) throw std::invalid_argument("kernel listing lacks a ';; spec' header");
    if (!have_body) throw std::invalid_argument("kernel listing lacks a ';; body' header");

    KernelProgram kernel = generate_kernel(*spec, weights.value_or(WeightSet::identity()), config);
    kernel.instructions = parse_listing(text);
    kernel.body_begin = body_begin;
    kernel.body_end = body_end;
    kernel.steps_per_body = steps;
    kernel.step_ranges = ranges;
    if (body_begin >= body_end || body_end > kernel.instructions.size())
        throw std::invalid_argument("body range outside the listing");
    for (const auto& [b, e] : ranges)
        if (b >= e || e > kernel.instructions.size()) throw std::invalid_argument("step range outside the listing");
    return kernel;
}

}  // namespace ppc450
