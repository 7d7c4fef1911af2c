#pragma once

#include <string>
#include <vector>

#include "matcache/analysis.hpp"
#include "matcache/cache.hpp"
#include "matcache/geom.hpp"
#include "matcache/texture.hpp"

namespace matcache {

enum class Opcode : uint8_t {
    PushConst,
    LoadUv,
    LoadPosition,
    LoadNormal,
    LoadIncoming,
    TexSample,
    Checker,
    Noise,
    Add,
    Sub,
    Mul,
    Div,
    Mix,
    Clamp,
    Dot,
    SinWave,
    Ramp,
    Power,
    BsdfDiffuse,
    CacheLookup,
    CacheStore,
    End,
};

/// One linear instruction. Fields beyond `op` are meaningful per opcode;
/// the struct stays flat so the interpreter loop is branch-and-go.
struct Instruction {
    Opcode op = Opcode::End;
    Value constant;                  // PushConst
    UvChannel uv_channel = UvChannel::Both;  // LoadUv
    const Texture* texture = nullptr;        // TexSample
    WrapMode wrap = WrapMode::Repeat;        // TexSample
    float checker_scale = 1.0f;              // Checker
    NoiseParams noise;                       // Noise
    uint32_t ramp_index = 0;                 // Ramp: index into CompiledProgram::ramps
    uint32_t node_idx = 0;                   // CacheLookup/CacheStore: node id in the folded graph
    uint32_t bracket = 0;                    // CacheLookup/CacheStore: ordinal of the cache point
    bool uses_uv = false;                    // CacheLookup/CacheStore
    bool scalar_result = false;              // CacheLookup: retag decoded hits as scalar
    int32_t skip_offset = 0;                 // CacheLookup: pc delta on a hit, lands after the store
};

/// Largest number of cache points one compiled material may carry; the
/// executor keeps a pending-descriptor slot per bracket on its frame.
constexpr uint32_t kMaxCachePoints = 64;

struct CompileOptions {
    int stack_limit = 256;
};

/// Compile failure (stack overflow, too many cache points, missing texture).
class CompileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Post-order instruction stream for one material. Immutable and shareable
/// across threads; `max_stack` bounds the operand depth on every path,
/// lookup-hit and miss alike.
struct CompiledProgram {
    uint32_t material_id = 0;
    std::vector<Instruction> code;
    std::vector<std::vector<ops::RampStop>> ramps;
    int max_stack = 0;
    uint32_t cache_point_count = 0;
};

/// Emits post-order code for the analyzed graph. Each cache point's subtree
/// is bracketed as [CacheLookup ... CacheStore]; a lookup hit pushes the
/// cached value and jumps past the store. Shared nodes are expanded per
/// consumer so the stack discipline stays a plain tree walk.
CompiledProgram compile(const AnalyzedGraph& ag, const TexturePool& pool,
                        const CompileOptions& options = {});

struct EvalStats {
    uint64_t nodes_found = 0;           // lookup hits
    uint64_t instructions_executed = 0;
    uint64_t stores_attempted = 0;
    uint64_t stores_won = 0;
    uint64_t max_stack_seen = 0;

    EvalStats& operator+=(const EvalStats& o) {
        nodes_found += o.nodes_found;
        instructions_executed += o.instructions_executed;
        stores_attempted += o.stores_attempted;
        stores_won += o.stores_won;
        max_stack_seen = max_stack_seen < o.max_stack_seen ? o.max_stack_seen : max_stack_seen;
        return *this;
    }
};

/// Cache wiring for execution; a null cache disables lookup/store entirely.
struct CacheBinding {
    MaterialCache* cache = nullptr;
    int mip_offset = 0;

    bool enabled() const { return cache != nullptr; }
};

/// Runs the program at a shading point and returns the BSDF base color.
/// Reentrant: all mutable state lives on this call's frame except the
/// cache, which is safe under its own contract.
Value execute(const CompiledProgram& program, const ShadingPoint& sp, const CacheBinding& binding,
              EvalStats& stats);

/// Human-readable listing, one instruction per line, skip offsets resolved
/// to labels.
std::string disassemble(const CompiledProgram& program);

}  // namespace matcache
