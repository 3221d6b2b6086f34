#include "ppc450/memory_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace ppc450 {

std::string_view tier_name(Tier tier) {
    switch (tier) {
        case Tier::L1: return "l1";
        case Tier::L3: return "l3";
        case Tier::Stream: return "stream";
        case Tier::Full: return "full";
    }
    return "?";
}

Tier parse_tier(std::string_view name) {
    for (Tier t : {Tier::L1, Tier::L3, Tier::Stream, Tier::Full})
        if (tier_name(t) == name) return t;
    throw std::invalid_argument("unknown memory tier '" + std::string(name) + "' (expected l1, l3, stream or full)");
}

MemoryModel::MemoryModel(Tier tier, const MachineConfig& config) : tier_(tier), config_(config) {
    config_.validate();
    if (tier_ != Tier::Full) return;
    l1_.resize(static_cast<std::size_t>(config_.l1_sets) * config_.l1_ways);
    l1_next_victim_.assign(config_.l1_sets, 0);
    l3_sets_ = static_cast<int>(std::max<long>(1, config_.l3_bytes / (static_cast<long>(config_.l3_line_bytes) * config_.l3_ways)));
    l3_tags_.assign(static_cast<std::size_t>(l3_sets_) * config_.l3_ways, 0);
    l3_stamp_.assign(l3_tags_.size(), 0);
}

const MemoryModel::L1Line* MemoryModel::find_l1(std::uint64_t line) const {
    const std::size_t set = line % config_.l1_sets;
    for (int w = 0; w < config_.l1_ways; ++w) {
        const L1Line& l = l1_[set * config_.l1_ways + w];
        if (l.valid && l.tag == line) return &l;
    }
    return nullptr;
}

void MemoryModel::fill_l1(std::uint64_t line, long ready) {
    const std::size_t set = line % config_.l1_sets;
    int& victim = l1_next_victim_[set];
    l1_[set * config_.l1_ways + victim] = {line, ready, true};
    victim = (victim + 1) % config_.l1_ways;
}

bool MemoryModel::l3_access(std::uint64_t l3_line) {
    const std::size_t set = l3_line % l3_sets_;
    const std::size_t base = set * config_.l3_ways;
    ++l3_clock_;
    std::size_t lru = base;
    for (int w = 0; w < config_.l3_ways; ++w) {
        if (l3_tags_[base + w] == l3_line + 1) {
            l3_stamp_[base + w] = l3_clock_;
            return true;
        }
        if (l3_stamp_[base + w] < l3_stamp_[lru]) lru = base + w;
    }
    l3_tags_[lru] = l3_line + 1;
    l3_stamp_[lru] = l3_clock_;
    return false;
}

void MemoryModel::warm_l3(std::uint64_t begin, std::uint64_t end) {
    if (tier_ != Tier::Full) return;
    for (std::uint64_t a = begin - begin % config_.l3_line_bytes; a < end; a += config_.l3_line_bytes)
        l3_access(a / config_.l3_line_bytes);
}

double MemoryModel::fetch(std::uint64_t l3_line, int bytes, long cycle) {
    const bool hit = l3_access(l3_line);
    ++(hit ? stats_.l3_hits : stats_.l3_misses);
    const int latency = config_.load_latency_l1 + config_.l3_penalty + (hit ? 0 : config_.dram_penalty);
    const double start = std::max<double>(cycle, link_free_);
    link_free_ = start + bytes / config_.l3_link_bw;
    return std::max<double>(cycle + latency, link_free_);
}

void MemoryModel::top_up(Stream& s, long cycle) {
    const std::uint64_t current = s.buffered.empty() ? s.next_line - 1 : s.buffered.front().first;
    while (s.next_line <= current + static_cast<std::uint64_t>(config_.l2_prefetch_depth)) {
        const std::uint64_t l3_line = s.next_line * config_.l2_line_bytes / config_.l3_line_bytes;
        s.buffered.emplace_back(s.next_line, fetch(l3_line, config_.l2_line_bytes, cycle));
        ++stats_.prefetches;
        stats_.prefetch_bytes += config_.l2_line_bytes;
        ++s.next_line;
    }
}

int MemoryModel::l2_lookup(std::uint64_t l2_line, long cycle) {
    for (Stream& s : streams_) {
        auto it = std::find_if(s.buffered.begin(), s.buffered.end(), [&](const auto& b) { return b.first == l2_line; });
        if (it == s.buffered.end()) continue;
        ++stats_.l2_hits;
        const double ready = it->second;
        s.buffered.erase(s.buffered.begin(), it);
        s.last_use = cycle;
        top_up(s, cycle);
        return config_.load_latency_l2 + static_cast<int>(std::max(0.0, ready - cycle) + 0.999999);
    }

    ++stats_.l2_misses;
    const std::uint64_t l3_line = l2_line * config_.l2_line_bytes / config_.l3_line_bytes;
    const double ready = fetch(l3_line, config_.l1_line_bytes, cycle);

    if (config_.l2_prefetch_depth > 0) {
        const bool sequential = std::find(recent_misses_.begin(), recent_misses_.end(), l2_line - 1) != recent_misses_.end();
        const bool follows_stream = std::any_of(streams_.begin(), streams_.end(),
                                                [&](const Stream& s) { return s.next_line > l2_line && !s.buffered.empty() && s.buffered.front().first <= l2_line; });
        if ((config_.optimistic_prefetch || sequential) && !follows_stream) {
            const std::size_t capacity = std::max(1, config_.l2_slots / (config_.l2_prefetch_depth + 1));
            Stream fresh;
            fresh.next_line = l2_line + 1;
            fresh.last_use = cycle;
            std::size_t slot = streams_.size();
            if (slot < capacity) {
                streams_.push_back(std::move(fresh));
            } else {
                auto lru = std::min_element(streams_.begin(), streams_.end(),
                                            [](const Stream& a, const Stream& b) { return a.last_use < b.last_use; });
                slot = static_cast<std::size_t>(lru - streams_.begin());
                streams_[slot] = std::move(fresh);
            }
            ++stats_.streams_allocated;
            Stream& s = streams_[slot];
            // The demand line occupies the stream's current slot.
            s.buffered.emplace_back(l2_line, ready);
            top_up(s, cycle);
        }
        recent_misses_.push_back(l2_line);
        if (recent_misses_.size() > 16) recent_misses_.erase(recent_misses_.begin());
    }
    return static_cast<int>(ready - cycle + 0.999999);
}

int MemoryModel::outstanding(long cycle) const {
    return static_cast<int>(std::count_if(in_flight_.begin(), in_flight_.end(), [&](long r) { return r > cycle; }));
}

bool MemoryModel::load_blocked(std::uint64_t addr, long cycle) const {
    if (tier_ != Tier::Full) return false;
    if (find_l1(addr / config_.l1_line_bytes)) return false;
    return outstanding(cycle) >= config_.max_outstanding_misses;
}

int MemoryModel::load(std::uint64_t addr, long cycle) {
    ++stats_.loads;
    switch (tier_) {
        case Tier::L1: ++stats_.l1_hits; return config_.load_latency_l1;
        case Tier::L3: ++stats_.l1_misses; ++stats_.l3_hits; return config_.load_latency_l1 + config_.l3_penalty;
        case Tier::Stream:
            ++stats_.l1_misses;
            ++stats_.l3_misses;
            return config_.load_latency_l1 + config_.l3_penalty + config_.dram_penalty;
        case Tier::Full: break;
    }
    const std::uint64_t line = addr / config_.l1_line_bytes;
    if (const L1Line* l = find_l1(line)) {
        if (l->ready <= cycle) {
            ++stats_.l1_hits;
            return config_.load_latency_l1;
        }
        ++stats_.l1_merged;
        return std::max<int>(config_.load_latency_l1, static_cast<int>(l->ready - cycle));
    }
    ++stats_.l1_misses;
    std::erase_if(in_flight_, [&](long r) { return r <= cycle; });
    const int latency = std::max(config_.load_latency_l1, l2_lookup(addr / config_.l2_line_bytes, cycle));
    fill_l1(line, cycle + latency);
    in_flight_.push_back(cycle + latency);
    return latency;
}

void MemoryModel::store(std::uint64_t, long) { ++stats_.stores; }

}  // namespace ppc450
