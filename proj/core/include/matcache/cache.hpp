#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "matcache/value.hpp"

namespace matcache {

/// Unique key of one cacheable-node occurrence: which node of which
/// material, at which virtual-texture texel. Non-uv cache points use the
/// all-zero mip/texel sentinel.
struct CacheDescriptor {
    uint32_t mat_idx = 0;
    uint32_t node_idx = 0;
    uint8_t mip_level = 0;
    uint32_t texel_x = 0;
    uint32_t texel_y = 0;

    friend bool operator==(const CacheDescriptor&, const CacheDescriptor&) = default;
};

/// First hash: selects the cell (callers take it modulo the cell count).
uint64_t hash_cell(const CacheDescriptor& desc);

/// Second hash: 32-bit key-equality check stored in the entry's high word.
/// Never returns 0 — that bit pattern marks an empty slot.
uint32_t hash_check(const CacheDescriptor& desc);

/// Packs an rgb value into 32 bits with a shared exponent: 8-bit mantissa
/// per channel plus an exponent byte biased by 128. Negative components
/// clamp to 0. Per-channel absolute error of decode(encode(v)) is at most
/// max_component(v)/256, and (0,0,0) round-trips exactly (exponent byte 0
/// with zero mantissas is the canonical black).
uint32_t encode_value(Color3 value);
Color3 decode_value(uint32_t packed);

inline uint64_t pack_entry(uint32_t hash, uint32_t payload) {
    return (static_cast<uint64_t>(hash) << 32) | payload;
}
inline uint32_t entry_hash(uint64_t entry) { return static_cast<uint32_t>(entry >> 32); }
inline uint32_t entry_payload(uint64_t entry) { return static_cast<uint32_t>(entry); }

/// Table footprint in bytes; throws std::overflow_error if it does not fit.
uint64_t memory_bytes(uint64_t n_cells, uint64_t n_entries);

enum class InsertOutcome : uint8_t {
    Won,             // our CAS published the value
    LostRace,        // another thread occupied the slot first
    AlreadyPresent,  // a slot with this check-hash already existed
    CellFull,        // no empty or matching slot in the cell; value dropped
};

struct UpdateResult {
    InsertOutcome outcome = InsertOutcome::CellFull;
    uint64_t slot = ~uint64_t{0};  // flat slot index the update targeted
    uint64_t packed = 0;           // entry word we attempted to publish
};

/// Fixed-size progressive material cache: n_cells cells of n_entries
/// 64-bit slots, each slot (check_hash << 32 | payload), zero meaning
/// empty. Slots are write-once: one CAS from zero publishes an entry and
/// nothing ever overwrites it (first insert wins). Any number of threads
/// may update and look up concurrently; lookups are wait-free.
class MaterialCache {
public:
    MaterialCache(uint64_t n_cells, uint32_t n_entries);

    /// Scans the descriptor's cell for a matching or empty slot; if empty,
    /// attempts a single CAS from zero. Collisions keep the first value.
    UpdateResult update(const CacheDescriptor& desc, Color3 value);

    /// Same scan as update; returns the decoded payload on a hash match.
    std::optional<Color3> lookup(const CacheDescriptor& desc);

    uint64_t n_cells() const { return n_cells_; }
    uint32_t n_entries() const { return n_entries_; }
    uint64_t slot_count() const { return n_cells_ * n_entries_; }
    uint64_t bytes() const { return slot_count() * 8; }

    /// Raw slot word, for audits and tests.
    uint64_t slot_word(uint64_t slot) const {
        return table_[slot].load(std::memory_order_acquire);
    }

    uint64_t occupied_slots() const;

    struct Counters {
        uint64_t lookups = 0;
        uint64_t hits = 0;
        uint64_t inserts_won = 0;
        uint64_t inserts_lost_full = 0;
    };
    Counters counters() const;
    void reset_counters();

    /// Binary dump: little-endian u64 n_cells, u64 n_entries, then every
    /// slot word in order.
    void dump(const std::filesystem::path& path) const;

private:
    uint64_t n_cells_;
    uint32_t n_entries_;
    std::unique_ptr<std::atomic<uint64_t>[]> table_;

    // Diagnostics only; relaxed increments, one cache line each.
    alignas(64) std::atomic<uint64_t> lookups_{0};
    alignas(64) std::atomic<uint64_t> hits_{0};
    alignas(64) std::atomic<uint64_t> inserts_won_{0};
    alignas(64) std::atomic<uint64_t> inserts_lost_full_{0};
};

struct AuditReport {
    uint64_t n_cells = 0;
    uint64_t n_entries = 0;
    uint64_t occupied = 0;
    bool clean = false;
    std::string problem;       // empty when clean
    int64_t bad_cell = -1;     // first cell with duplicate check-hashes
};

/// Verifies a dump file: readable header, plausible sizes, and no duplicate
/// nonzero check-hash within any cell.
AuditReport audit_dump(const std::filesystem::path& path);

}  // namespace matcache
