#include "ppc450/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace ppc450 {

std::vector<int> Schedule::order() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.position);
    return out;
}

Schedule make_schedule(std::span<const Instruction> block, std::span<const int> cycles, const MachineConfig& config) {
    Schedule s;
    for (std::size_t i = 0; i < block.size(); ++i) {
        s.entries.push_back({static_cast<int>(i), block[i].id, cycles[i]});
        s.length = std::max(s.length, cycles[i] + instruction_resource(block[i].op, config).occupancy - 1);
    }
    std::sort(s.entries.begin(), s.entries.end(), [](const ScheduleEntry& a, const ScheduleEntry& b) {
        return a.cycle != b.cycle ? a.cycle < b.cycle : a.position < b.position;
    });
    return s;
}

Program apply_schedule(std::span<const Instruction> block, const Schedule& schedule) {
    Program out;
    out.reserve(block.size());
    for (const auto& e : schedule.entries) out.push_back(block[e.position]);
    return out;
}

namespace {

bool slot_b(Unit u) { return u != Unit::FPU; }

struct BlockInfo {
    DependencyGraph dag;
    std::vector<Resource> res;
    std::vector<int> tail;      // longest path to a sink, +1
    std::vector<int> tail_occ;  // longest path to a sink plus the sink's occupancy
};

BlockInfo analyze(std::span<const Instruction> block, const MachineConfig& config) {
    BlockInfo info;
    info.dag = build_dag(block, config);
    for (const auto& in : block) info.res.push_back(instruction_resource(in.op, config));
    info.tail = tail_lengths(info.dag);
    const int n = static_cast<int>(block.size());
    info.tail_occ.assign(n, 0);
    for (int v = n - 1; v >= 0; --v) {
        int t = info.res[v].occupancy;
        for (int e : info.dag.successors(v)) {
            const auto& edge = info.dag.edge(e);
            t = std::max(t, edge.weight + info.tail_occ[edge.to]);
        }
        info.tail_occ[v] = t;
    }
    return info;
}

// Earliest cycle at which `v` satisfies its dependencies given issued
// predecessors; -1 when a predecessor is still unissued.
int dependency_ready(const DependencyGraph& dag, const std::vector<int>& cycle, int v) {
    int ready = 1;
    for (int e : dag.predecessors(v)) {
        const auto& edge = dag.edge(e);
        if (cycle[edge.from] == 0) return -1;
        ready = std::max(ready, cycle[edge.from] + edge.weight);
    }
    return ready;
}

// One register value: a (possibly live-in) definition and the instructions
// that read it, partial writers included.
struct LiveValue {
    RegRef reg;
    int def = -1;
    std::vector<int> readers;
};

std::vector<LiveValue> live_values(std::span<const Instruction> block) {
    std::vector<LiveValue> values;
    std::map<RegRef, int> current;
    auto attach = [&](RegRef reg, int pos) {
        auto it = current.find(reg);
        if (it == current.end()) {
            values.push_back({reg, -1, {}});
            it = current.emplace(reg, static_cast<int>(values.size()) - 1).first;
        }
        values[it->second].readers.push_back(pos);
    };
    for (int j = 0; j < static_cast<int>(block.size()); ++j) {
        for (const auto& reg : reads_of(block[j])) attach(reg, j);
        for (const auto& reg : writes_of(block[j])) {
            if (is_partial_write(block[j].op)) {
                attach(reg, j);
            } else {
                values.push_back({reg, j, {}});
                current[reg] = static_cast<int>(values.size()) - 1;
            }
        }
    }
    return values;
}

std::uint64_t reg_bit(RegRef r) { return std::uint64_t{1} << (r.index + (r.file == RegFile::FPR ? 32 : 0)); }

constexpr std::uint64_t kGprMask = 0xFFFFFFFFull;

}  // namespace

Schedule schedule_greedy(std::span<const Instruction> block, const MachineConfig& config) {
    const int n = static_cast<int>(block.size());
    if (n == 0) return {};
    BlockInfo info = analyze(block, config);
    std::vector<int> cycle(n, 0);
    int remaining = n;
    int c = 1;
    int slot_b_free = 1;
    while (remaining > 0) {
        int best_f = -1, best_b = -1;
        int next_event = std::numeric_limits<int>::max();
        for (int v = 0; v < n; ++v) {
            if (cycle[v] != 0) continue;
            int ready = dependency_ready(info.dag, cycle, v);
            if (ready < 0) continue;
            const Unit u = info.res[v].unit;
            if (slot_b(u)) ready = std::max(ready, slot_b_free);
            if (ready > c) {
                next_event = std::min(next_event, ready);
                continue;
            }
            int& best = slot_b(u) ? best_b : best_f;
            if (best < 0 || info.tail[v] > info.tail[best]) best = v;
        }
        if (best_f < 0 && best_b < 0) {
            c = next_event;
            continue;
        }
        for (int v : {best_f, best_b}) {
            if (v < 0) continue;
            cycle[v] = c;
            --remaining;
            if (slot_b(info.res[v].unit)) slot_b_free = c + info.res[v].occupancy;
        }
        ++c;
    }
    return make_schedule(block, cycle, config);
}

// ---------------------------------------------------------------------------
// Exact branch and bound

namespace {

class ExactSearch {
public:
    ExactSearch(std::span<const Instruction> block, const MachineConfig& config, const RegisterLimits& limits,
                const ExactOptions& options)
        : block_(block), config_(config), limits_(limits), options_(options), info_(analyze(block, config)),
          n_(static_cast<int>(block.size())), cycle_(n_, 0), est_(n_, 0) {
        for (int v = 0; v < n_; ++v) {
            if (info_.res[v].unit == Unit::FPU) ++fpu_left_;
            if (slot_b(info_.res[v].unit)) slot_b_work_ += info_.res[v].occupancy;
        }
        if (has_limits()) {
            values_ = live_values(block);
            reader_cycle_max_.assign(values_.size(), 0);
        }
    }

    bool has_limits() const { return limits_.gpr_max.has_value() || limits_.fpr_max.has_value(); }

    // Searches for a schedule strictly shorter than `bound`.
    bool run(int bound) {
        best_length_ = bound;
        found_ = false;
        search(1, 1, 0, n_);
        return found_;
    }

    const std::vector<int>& best_cycles() const { return best_cycles_; }
    std::size_t nodes() const { return nodes_; }

private:
    int lower_bound_from(int c, int slot_b_free, int length_so_far) {
        int lb = length_so_far;
        for (int v = 0; v < n_; ++v) {
            if (cycle_[v] != 0) continue;
            int e = c;
            for (int ei : info_.dag.predecessors(v)) {
                const auto& edge = info_.dag.edge(ei);
                int base = cycle_[edge.from] != 0 ? cycle_[edge.from] : est_[edge.from];
                e = std::max(e, base + edge.weight);
            }
            if (slot_b(info_.res[v].unit)) e = std::max(e, slot_b_free);
            est_[v] = e;
            lb = std::max(lb, e + info_.tail_occ[v] - 1);
        }
        if (fpu_left_ > 0) lb = std::max(lb, c + fpu_left_ - 1);
        if (slot_b_work_ > 0) lb = std::max(lb, std::max(c, slot_b_free) + slot_b_work_ - 1);
        return lb;
    }

    // Live-register check for cycle `c` once its issue decisions are final.
    bool pressure_ok(int c) const {
        std::uint64_t live = 0;
        for (std::size_t k = 0; k < values_.size(); ++k) {
            const auto& val = values_[k];
            int start = val.def < 0 ? 1 : cycle_[val.def];
            if (start == 0 || start > c) continue;
            bool alive;
            if (val.readers.empty()) {
                alive = start == c;
            } else {
                alive = reader_cycle_max_[k] >= c;
                for (int r : val.readers)
                    if (cycle_[r] == 0) alive = true;
            }
            if (alive) live |= reg_bit(val.reg);
        }
        if (limits_.gpr_max && std::popcount(live & kGprMask) > *limits_.gpr_max) return false;
        if (limits_.fpr_max && std::popcount(live >> 32) > *limits_.fpr_max) return false;
        return true;
    }

    void set_cycle(int v, int c) {
        cycle_[v] = c;
        if (info_.res[v].unit == Unit::FPU) --fpu_left_;
        if (slot_b(info_.res[v].unit)) slot_b_work_ -= info_.res[v].occupancy;
        if (has_limits())
            for (std::size_t k = 0; k < values_.size(); ++k)
                for (int r : values_[k].readers)
                    if (r == v) reader_stack_.push_back({k, std::exchange(reader_cycle_max_[k], std::max(reader_cycle_max_[k], c))});
    }

    void unset_cycle(int v, std::size_t stack_mark) {
        cycle_[v] = 0;
        if (info_.res[v].unit == Unit::FPU) ++fpu_left_;
        if (slot_b(info_.res[v].unit)) slot_b_work_ += info_.res[v].occupancy;
        while (reader_stack_.size() > stack_mark) {
            auto [k, old] = reader_stack_.back();
            reader_cycle_max_[k] = old;
            reader_stack_.pop_back();
        }
    }

    void search(int c, int slot_b_free, int length_so_far, int remaining) {
        if (++nodes_ > options_.node_limit)
            throw ScheduleError(ScheduleError::Kind::SearchLimit, "exact scheduler node limit exceeded");
        if (remaining == 0) {
            if (length_so_far < best_length_) {
                best_length_ = length_so_far;
                best_cycles_ = cycle_;
                found_ = true;
            }
            return;
        }
        if (lower_bound_from(c, slot_b_free, length_so_far) >= best_length_) return;

        std::vector<int> ready_f, ready_b;
        bool hold_ready = false;  // a ready slot-B op that would block the slot
        int next_event = std::numeric_limits<int>::max();
        for (int v = 0; v < n_; ++v) {
            if (cycle_[v] != 0) continue;
            int ready = dependency_ready(info_.dag, cycle_, v);
            if (ready < 0) continue;
            if (slot_b(info_.res[v].unit)) ready = std::max(ready, slot_b_free);
            if (ready > c) {
                next_event = std::min(next_event, ready);
                continue;
            }
            if (info_.res[v].unit == Unit::FPU) {
                ready_f.push_back(v);
            } else {
                ready_b.push_back(v);
                if (info_.res[v].occupancy > 1) hold_ready = true;
            }
        }
        if (ready_f.empty() && ready_b.empty()) {
            search(next_event, slot_b_free, length_so_far, remaining);
            return;
        }
        auto by_priority = [this](int x, int y) {
            return info_.tail[x] != info_.tail[y] ? info_.tail[x] > info_.tail[y] : x < y;
        };
        std::sort(ready_f.begin(), ready_f.end(), by_priority);
        std::sort(ready_b.begin(), ready_b.end(), by_priority);

        // Without register limits an idle slot is never better than issuing a
        // ready single-cycle instruction; holding back a multi-cycle one can be.
        const bool limited = has_limits();
        std::vector<int> choices_f = ready_f, choices_b = ready_b;
        if (choices_f.empty() || limited) choices_f.push_back(-1);
        if (choices_b.empty() || limited || hold_ready) choices_b.push_back(-1);

        for (int f : choices_f) {
            for (int b : choices_b) {
                if (f < 0 && b < 0) {
                    if (!limited && !hold_ready) continue;
                    if (limited && !pressure_ok(c)) continue;
                    search(c + 1, slot_b_free, length_so_far, remaining);
                    continue;
                }
                std::size_t mark = reader_stack_.size();
                int len = length_so_far;
                int new_slot_b_free = slot_b_free;
                int issued = 0;
                for (int v : {f, b}) {
                    if (v < 0) continue;
                    set_cycle(v, c);
                    ++issued;
                    len = std::max(len, c + info_.res[v].occupancy - 1);
                    if (slot_b(info_.res[v].unit)) new_slot_b_free = c + info_.res[v].occupancy;
                }
                if (!limited || pressure_ok(c)) search(c + 1, new_slot_b_free, len, remaining - issued);
                for (int v : {b, f})
                    if (v >= 0) unset_cycle(v, mark);
            }
        }
    }

    std::span<const Instruction> block_;
    const MachineConfig& config_;
    RegisterLimits limits_;
    ExactOptions options_;
    BlockInfo info_;
    int n_;
    std::vector<int> cycle_;
    std::vector<int> est_;
    int fpu_left_ = 0;
    int slot_b_work_ = 0;  // slot-B occupancy cycles still to issue
    std::vector<LiveValue> values_;
    std::vector<int> reader_cycle_max_;
    std::vector<std::pair<std::size_t, int>> reader_stack_;
    int best_length_ = 0;
    bool found_ = false;
    std::vector<int> best_cycles_;
    std::size_t nodes_ = 0;
};

bool fits(const PressureProfile& p, const RegisterLimits& limits) {
    return (!limits.gpr_max || p.gpr_max <= *limits.gpr_max) && (!limits.fpr_max || p.fpr_max <= *limits.fpr_max);
}

int serial_horizon(std::span<const Instruction> block, const MachineConfig& config) {
    int h = 1;
    for (const auto& in : block) {
        auto r = instruction_resource(in.op, config);
        h += std::max({r.latency, r.occupancy, 1});
    }
    return h;
}

}  // namespace

Schedule schedule_exact(std::span<const Instruction> block, const MachineConfig& config, const RegisterLimits& limits,
                        const ExactOptions& options) {
    if (block.size() > options.max_block || block.size() > 64)
        throw ScheduleError(ScheduleError::Kind::CapExceeded,
                            "block of " + std::to_string(block.size()) + " instructions exceeds the exact scheduler cap of " +
                                std::to_string(options.max_block));
    if (block.empty()) return {};

    Schedule greedy = schedule_greedy(block, config);
    const bool limited = limits.gpr_max.has_value() || limits.fpr_max.has_value();
    int bound;
    if (!limited || fits(register_pressure(greedy, block), limits)) {
        bound = greedy.length;
        if (bound == lower_bound(build_dag(block, config), block, config) && !limited) return greedy;
    } else {
        bound = serial_horizon(block, config) + 1;
    }

    ExactSearch search(block, config, limits, options);
    if (search.run(bound)) return make_schedule(block, search.best_cycles(), config);
    if (!limited || bound == greedy.length) return greedy;

    // No schedule within the horizon: name the binding register file.
    auto describe = [&](const RegisterLimits& single, const char* file, int value) -> std::string {
        ExactSearch probe(block, config, single, options);
        if (probe.run(serial_horizon(block, config) + 1)) return {};
        return std::string(file) + "_max=" + std::to_string(value) + " is below the block's register pressure floor";
    };
    std::string why;
    if (limits.fpr_max) why = describe({std::nullopt, limits.fpr_max}, "FPR", *limits.fpr_max);
    if (why.empty() && limits.gpr_max) why = describe({limits.gpr_max, std::nullopt}, "GPR", *limits.gpr_max);
    if (why.empty()) why = "GPR and FPR limits are jointly infeasible";
    throw ScheduleError(ScheduleError::Kind::Infeasible, "infeasible register limits: " + why);
}

PressureProfile register_pressure(const Schedule& schedule, std::span<const Instruction> block) {
    PressureProfile p;
    const int len = std::max(schedule.length, 1);
    std::vector<int> cycle(block.size(), 0);
    for (const auto& e : schedule.entries) cycle[e.position] = e.cycle;
    std::vector<std::uint64_t> live(len + 1, 0);
    for (const auto& val : live_values(block)) {
        int start = val.def < 0 ? 1 : cycle[val.def];
        int end = start;
        for (int r : val.readers) end = std::max(end, cycle[r]);
        for (int c = start; c <= end && c <= len; ++c) live[c] |= reg_bit(val.reg);
    }
    for (int c = 1; c <= len; ++c) {
        p.gpr.push_back(std::popcount(live[c] & kGprMask));
        p.fpr.push_back(std::popcount(live[c] >> 32));
        p.gpr_max = std::max(p.gpr_max, p.gpr.back());
        p.fpr_max = std::max(p.fpr_max, p.fpr.back());
    }
    return p;
}

std::vector<Violation> validate_schedule(const Schedule& schedule, std::span<const Instruction> block,
                                         const MachineConfig& config) {
    std::vector<Violation> out;
    const int n = static_cast<int>(block.size());
    std::vector<int> cycle(n, 0);
    for (const auto& e : schedule.entries) {
        if (e.position < 0 || e.position >= n) {
            out.push_back({ViolationKind::Missing, e.id, -1, 0, e.cycle, "entry refers to no instruction in the block"});
            continue;
        }
        if (e.cycle < 1) out.push_back({ViolationKind::BadCycle, e.id, -1, 0, e.cycle, "issue cycle must be >= 1"});
        if (cycle[e.position] != 0)
            out.push_back({ViolationKind::Duplicate, e.id, -1, 0, e.cycle, "instruction scheduled more than once"});
        cycle[e.position] = e.cycle;
    }
    for (int v = 0; v < n; ++v)
        if (cycle[v] == 0) out.push_back({ViolationKind::Missing, block[v].id, -1, 0, 0, "instruction never scheduled"});

    std::map<int, std::vector<int>> by_cycle_f, by_cycle_b;
    std::vector<std::pair<int, int>> slot_b_ops;
    for (int v = 0; v < n; ++v) {
        if (cycle[v] == 0) continue;
        Unit u = unit_of(block[v].op);
        (u == Unit::FPU ? by_cycle_f : by_cycle_b)[cycle[v]].push_back(v);
        if (u != Unit::FPU) slot_b_ops.push_back({cycle[v], v});
    }
    for (const auto& [c, vs] : by_cycle_f)
        if (vs.size() > 1)
            out.push_back({ViolationKind::FpuConflict, block[vs[0]].id, block[vs[1]].id, 0, c,
                           "more than one FPU issue in cycle " + std::to_string(c)});
    for (const auto& [c, vs] : by_cycle_b)
        if (vs.size() > 1)
            out.push_back({ViolationKind::SlotConflict, block[vs[0]].id, block[vs[1]].id, 0, c,
                           "more than one load/store/integer issue in cycle " + std::to_string(c)});
    // A load/store holds slot B for its occupancy.
    std::sort(slot_b_ops.begin(), slot_b_ops.end());
    for (std::size_t k = 1; k < slot_b_ops.size(); ++k) {
        const auto [c0, v0] = slot_b_ops[k - 1];
        const auto [c1, v1] = slot_b_ops[k];
        const int occ = instruction_resource(block[v0].op, config).occupancy;
        if (c1 != c0 && c1 < c0 + occ)
            out.push_back({ViolationKind::LsuSpacing, block[v0].id, block[v1].id, 0, c1,
                           "slot B issue in cycle " + std::to_string(c1) + " while the load/store issued in cycle " +
                               std::to_string(c0) + " still occupies it"});
    }

    DependencyGraph dag = build_dag(block, config);
    for (const auto& e : dag.edges()) {
        if (cycle[e.from] == 0 || cycle[e.to] == 0) continue;
        if (cycle[e.to] < cycle[e.from] + e.weight) {
            std::ostringstream os;
            os << dep_kind_name(e.kind) << " edge (" << block[e.from].id << ", " << block[e.to].id << ", " << e.weight
               << ") violated: " << cycle[e.from] << " -> " << cycle[e.to];
            out.push_back({ViolationKind::Dependency, block[e.from].id, block[e.to].id, e.weight, cycle[e.to], os.str()});
        }
    }
    return out;
}

std::string schedule_csv(const Schedule& schedule, std::span<const Instruction> block) {
    std::ostringstream os;
    os << "cycle,instr_id,opcode\n";
    for (const auto& e : schedule.entries) os << e.cycle << ',' << e.id << ',' << opcode_name(block[e.position].op) << '\n';
    return os.str();
}

}  // namespace ppc450
