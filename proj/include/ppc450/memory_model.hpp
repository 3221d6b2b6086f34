#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "ppc450/isa.hpp"

namespace ppc450 {

enum class Tier : std::uint8_t { L1, L3, Stream, Full };

std::string_view tier_name(Tier tier);
Tier parse_tier(std::string_view name);  // l1|l3|stream|full, throws std::invalid_argument

struct MemoryStats {
    long loads = 0;
    long stores = 0;
    long l1_hits = 0;
    long l1_misses = 0;
    long l1_merged = 0;  // misses to a line already in flight
    long l2_hits = 0;    // served from the prefetch buffer
    long l2_misses = 0;
    long l3_hits = 0;
    long l3_misses = 0;
    long prefetches = 0;
    long prefetch_bytes = 0;
    long streams_allocated = 0;
};

/// Load latency source for the pipeline.
///
/// Uniform tiers return a fixed latency (L1; L1 + L3 penalty; L1 + L3 + DRAM
/// penalty) and never limit outstanding misses. The full hierarchy models:
/// - L1: set-associative, FIFO, 32-byte lines, write-through, no write allocate
/// - at most `max_outstanding_misses` L1 line fills in flight
/// - L2 stream prefetcher: `l2_slots` 128-byte buffers, each stream holding
///   depth + 1 of them, least recently used stream replaced
/// - L3: set-associative LRU; misses go to DRAM
/// - a shared L3 link of `l3_link_bw` bytes/cycle for demand and prefetch fills
class MemoryModel {
public:
    MemoryModel(Tier tier, const MachineConfig& config);

    Tier tier() const { return tier_; }

    // True when a load to `addr` at `cycle` would need a new line fill while
    // the outstanding-miss limit is reached.
    bool load_blocked(std::uint64_t addr, long cycle) const;

    // Performs a load issued at `cycle`; returns its latency in cycles.
    int load(std::uint64_t addr, long cycle);

    void store(std::uint64_t addr, long cycle);

    // Marks [begin, end) as resident in the L3.
    void warm_l3(std::uint64_t begin, std::uint64_t end);

    const MemoryStats& stats() const { return stats_; }

    int outstanding(long cycle) const;

private:
    struct L1Line {
        std::uint64_t tag = 0;
        long ready = 0;
        bool valid = false;
    };
    struct Stream {
        std::uint64_t next_line = 0;  // next L2 line to prefetch
        std::deque<std::pair<std::uint64_t, double>> buffered;  // line, ready cycle
        long last_use = 0;
    };

    const L1Line* find_l1(std::uint64_t line) const;
    void fill_l1(std::uint64_t line, long ready);
    bool l3_access(std::uint64_t l3_line);  // true on hit; fills on miss
    double fetch(std::uint64_t l3_line, int bytes, long cycle);
    void top_up(Stream& s, long cycle);
    int l2_lookup(std::uint64_t l2_line, long cycle);

    Tier tier_;
    MachineConfig config_;
    MemoryStats stats_;

    std::vector<L1Line> l1_;
    std::vector<int> l1_next_victim_;
    std::vector<long> in_flight_;  // ready cycles of outstanding fills

    std::vector<Stream> streams_;
    std::vector<std::uint64_t> recent_misses_;

    int l3_sets_ = 1;
    std::vector<std::uint64_t> l3_tags_;
    std::vector<long> l3_stamp_;
    long l3_clock_ = 0;
    double link_free_ = 0;
};

}  // namespace ppc450
