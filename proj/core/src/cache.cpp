#include "matcache/cache.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "matcache/rng.hpp"

namespace matcache {

namespace {

// Distinct fixed seeds for the two hash functions.
constexpr uint64_t kCellSeed = 0x243f6a8885a308d3ull;
constexpr uint64_t kCheckSeed = 0x13198a2e03707344ull;

// The descriptor's 17 bytes in fixed little-endian field order, packed into
// three words and run through the splitmix64 finalizer chain.
uint64_t hash_descriptor(const CacheDescriptor& d, uint64_t seed) {
    const uint64_t w0 = static_cast<uint64_t>(d.mat_idx) | (static_cast<uint64_t>(d.node_idx) << 32);
    const uint64_t w1 = static_cast<uint64_t>(d.texel_x) | (static_cast<uint64_t>(d.texel_y) << 32);
    const uint64_t w2 = d.mip_level;
    uint64_t h = seed;
    h = mix64(h ^ w0);
    h = mix64(h ^ w1);
    h = mix64(h ^ w2);
    return h;
}

}  // namespace

uint64_t hash_cell(const CacheDescriptor& desc) { return hash_descriptor(desc, kCellSeed); }

uint32_t hash_check(const CacheDescriptor& desc) {
    const uint32_t h = static_cast<uint32_t>(hash_descriptor(desc, kCheckSeed));
    return h == 0 ? 1u : h;  // 0 is the empty-slot sentinel
}

uint32_t encode_value(Color3 value) {
    // Totality: negative and non-finite components collapse to 0.
    const double r = (std::isfinite(value.r) && value.r > 0.0f) ? value.r : 0.0;
    const double g = (std::isfinite(value.g) && value.g > 0.0f) ? value.g : 0.0;
    const double b = (std::isfinite(value.b) && value.b > 0.0f) ? value.b : 0.0;

    const double d = std::fmax(r, std::fmax(g, b));
    if (d <= 0.0) return 0;  // canonical black

    int e = 0;
    std::frexp(d, &e);  // d = f * 2^e, f in [0.5, 1)
    if (e < -127) return 0;
    if (e > 127) e = 127;  // saturate; mantissas clamp below

    const double fac = std::ldexp(256.0, -e);  // exact power-of-two scale
    auto mant = [&](double c) -> uint32_t {
        const uint32_t m = static_cast<uint32_t>(c * fac);  // floor
        return m > 255 ? 255u : m;
    };
    return (static_cast<uint32_t>(e + 128) << 24) | (mant(r) << 16) | (mant(g) << 8) | mant(b);
}

Color3 decode_value(uint32_t packed) {
    const uint32_t exponent = packed >> 24;
    if (exponent == 0) return {0.0f, 0.0f, 0.0f};
    // (m + 0.5) / 256 * 2^e; exact in double and in float (9-bit mantissa).
    const double scale = std::ldexp(1.0, static_cast<int>(exponent) - 128 - 8);
    return {static_cast<float>((((packed >> 16) & 255u) + 0.5) * scale),
            static_cast<float>((((packed >> 8) & 255u) + 0.5) * scale),
            static_cast<float>(((packed & 255u) + 0.5) * scale)};
}

uint64_t memory_bytes(uint64_t n_cells, uint64_t n_entries) {
    if (n_cells == 0 || n_entries == 0) return 0;
    const uint64_t slots = n_cells * n_entries;
    if (slots / n_entries != n_cells || slots > UINT64_MAX / 8) {
        throw std::overflow_error("cache size overflows 64 bits");
    }
    return slots * 8;
}

MaterialCache::MaterialCache(uint64_t n_cells, uint32_t n_entries)
    : n_cells_(n_cells), n_entries_(n_entries) {
    if (n_cells == 0 || n_entries == 0) {
        throw std::invalid_argument("cache dimensions must be nonzero");
    }
    memory_bytes(n_cells, n_entries);  // overflow check
    table_ = std::make_unique<std::atomic<uint64_t>[]>(slot_count());
    for (uint64_t i = 0; i < slot_count(); ++i) {
        table_[i].store(0, std::memory_order_relaxed);
    }
}

UpdateResult MaterialCache::update(const CacheDescriptor& desc, Color3 value) {
    const uint64_t cell = hash_cell(desc) % n_cells_;
    const uint32_t check = hash_check(desc);

    const uint64_t base = cell * n_entries_;
    for (uint32_t i = 0; i < n_entries_; ++i) {
        const uint64_t slot = base + i;
        const uint64_t current = table_[slot].load(std::memory_order_acquire);
        if (entry_hash(current) == check) {
            return {InsertOutcome::AlreadyPresent, slot, current};
        }
        if (current == 0) {
            const uint64_t packed = pack_entry(check, encode_value(value));
            uint64_t expected = 0;
            // Single attempt: on failure the first inserted value stays.
            if (table_[slot].compare_exchange_strong(expected, packed, std::memory_order_release,
                                                     std::memory_order_acquire)) {
                inserts_won_.fetch_add(1, std::memory_order_relaxed);
                return {InsertOutcome::Won, slot, packed};
            }
            return {InsertOutcome::LostRace, slot, packed};
        }
    }
    inserts_lost_full_.fetch_add(1, std::memory_order_relaxed);
    return {InsertOutcome::CellFull, ~uint64_t{0}, 0};
}

std::optional<Color3> MaterialCache::lookup(const CacheDescriptor& desc) {
    lookups_.fetch_add(1, std::memory_order_relaxed);
    const uint64_t cell = hash_cell(desc) % n_cells_;
    const uint32_t check = hash_check(desc);

    const uint64_t base = cell * n_entries_;
    for (uint32_t i = 0; i < n_entries_; ++i) {
        const uint64_t current = table_[base + i].load(std::memory_order_acquire);
        if (current == 0) return std::nullopt;  // first empty slot ends the scan
        if (entry_hash(current) == check) {
            hits_.fetch_add(1, std::memory_order_relaxed);
            return decode_value(entry_payload(current));
        }
    }
    return std::nullopt;
}

uint64_t MaterialCache::occupied_slots() const {
    uint64_t n = 0;
    for (uint64_t i = 0; i < slot_count(); ++i) {
        if (table_[i].load(std::memory_order_relaxed) != 0) ++n;
    }
    return n;
}

MaterialCache::Counters MaterialCache::counters() const {
    return {lookups_.load(std::memory_order_relaxed), hits_.load(std::memory_order_relaxed),
            inserts_won_.load(std::memory_order_relaxed),
            inserts_lost_full_.load(std::memory_order_relaxed)};
}

void MaterialCache::reset_counters() {
    lookups_.store(0, std::memory_order_relaxed);
    hits_.store(0, std::memory_order_relaxed);
    inserts_won_.store(0, std::memory_order_relaxed);
    inserts_lost_full_.store(0, std::memory_order_relaxed);
}

void MaterialCache::dump(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open cache dump for writing: " + path.string());
    const uint64_t header[2] = {n_cells_, static_cast<uint64_t>(n_entries_)};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    std::vector<uint64_t> row(n_entries_);
    for (uint64_t cell = 0; cell < n_cells_; ++cell) {
        for (uint32_t i = 0; i < n_entries_; ++i) {
            row[i] = table_[cell * n_entries_ + i].load(std::memory_order_relaxed);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * 8));
    }
    if (!out) throw std::runtime_error("short write on cache dump: " + path.string());
}

AuditReport audit_dump(const std::filesystem::path& path) {
    AuditReport report;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        report.problem = "cannot open dump: " + path.string();
        return report;
    }
    uint64_t header[2] = {0, 0};
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in) {
        report.problem = "truncated header";
        return report;
    }
    report.n_cells = header[0];
    report.n_entries = header[1];
    if (report.n_cells == 0 || report.n_entries == 0 || report.n_entries > (1u << 20)) {
        report.problem = "implausible table dimensions";
        return report;
    }

    std::vector<uint64_t> row(report.n_entries);
    std::unordered_set<uint32_t> seen;
    for (uint64_t cell = 0; cell < report.n_cells; ++cell) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * 8));
        if (!in) {
            report.problem = "truncated at cell " + std::to_string(cell);
            return report;
        }
        seen.clear();
        for (uint64_t word : row) {
            if (word == 0) continue;
            ++report.occupied;
            const uint32_t hash = entry_hash(word);
            if (hash == 0) {
                report.problem = "occupied slot with zero check-hash in cell " +
                                 std::to_string(cell);
                report.bad_cell = static_cast<int64_t>(cell);
                return report;
            }
            if (!seen.insert(hash).second) {
                report.problem = "duplicate check-hash in cell " + std::to_string(cell);
                report.bad_cell = static_cast<int64_t>(cell);
                return report;
            }
        }
    }
    // Trailing data means the header lied about the size.
    in.peek();
    if (!in.eof()) {
        report.problem = "trailing bytes after table";
        return report;
    }
    report.clean = true;
    return report;
}

}  // namespace matcache
