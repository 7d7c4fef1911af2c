#include "matcache/stackvm.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "matcache/eval.hpp"
#include "matcache/noise.hpp"
#include "matcache/raycone.hpp"

namespace matcache {

namespace {

struct Emitter {
    const AnalyzedGraph& ag;
    const TexturePool& pool;
    CompiledProgram& out;
    std::vector<bool> is_cache_point;
    std::vector<uint32_t> bracket_of;
    std::vector<int8_t> scalar_memo;  // -1 unknown, else bool

    Emitter(const AnalyzedGraph& ag_, const TexturePool& pool_, CompiledProgram& out_)
        : ag(ag_), pool(pool_), out(out_) {
        is_cache_point.assign(ag.graph.size(), false);
        bracket_of.assign(ag.graph.size(), 0);
        for (size_t i = 0; i < ag.cache_points.size(); ++i) {
            is_cache_point[ag.cache_points[i]] = true;
            bracket_of[ag.cache_points[i]] = static_cast<uint32_t>(i);
        }
        scalar_memo.assign(ag.graph.size(), -1);
    }

    // Static value type of a node; tags are propagated so a cache hit can
    // push a value with the same tag the subtree would have produced.
    bool scalar_result(NodeId id) {
        if (scalar_memo[id] >= 0) return scalar_memo[id] != 0;
        const Node& node = ag.graph.node(id);
        bool scalar = false;
        switch (node.kind) {
            case NodeKind::ConstFloat:
            case NodeKind::Checker:
            case NodeKind::NoiseFbm:
            case NodeKind::Dot:
                scalar = true;
                break;
            case NodeKind::Uv:
                scalar = std::get<UvParams>(node.params).channel != UvChannel::Both;
                break;
            case NodeKind::Add:
            case NodeKind::Sub:
            case NodeKind::Mul:
            case NodeKind::Div:
                scalar = scalar_result(node.inputs[0]) && scalar_result(node.inputs[1]);
                break;
            case NodeKind::Mix:
                scalar = scalar_result(node.inputs[0]) && scalar_result(node.inputs[1]);
                break;
            case NodeKind::Power:
                scalar = scalar_result(node.inputs[0]) && scalar_result(node.inputs[1]);
                break;
            case NodeKind::Clamp:
            case NodeKind::SinWave:
                scalar = scalar_result(node.inputs[0]);
                break;
            case NodeKind::BsdfOutput:
                scalar = scalar_result(node.inputs[0]);
                break;
            default:
                scalar = false;  // colors: ConstColor, ramp, textures, vectors, diffuse
                break;
        }
        scalar_memo[id] = scalar ? 1 : 0;
        return scalar;
    }

    void emit_node(NodeId id, bool inside_bracket) {
        if (is_cache_point[id] && !inside_bracket) {
            emit_bracket(id);
            return;
        }
        if (is_cache_point[id] && inside_bracket) {
            // Analysis guarantees non-nesting; a nested bracket means the
            // selection pass is broken.
            throw CompileError("nested cache point at node " + std::to_string(id));
        }
        emit_plain(id, inside_bracket);
    }

    void emit_bracket(NodeId point) {
        const size_t lookup_pc = out.code.size();
        Instruction lookup;
        lookup.op = Opcode::CacheLookup;
        lookup.node_idx = point;
        lookup.bracket = bracket_of[point];
        lookup.uses_uv = ag.uses_uv[point];
        lookup.scalar_result = scalar_result(point);
        out.code.push_back(lookup);

        emit_plain(point, /*inside_bracket=*/true);

        Instruction store;
        store.op = Opcode::CacheStore;
        store.node_idx = point;
        store.bracket = bracket_of[point];
        store.uses_uv = ag.uses_uv[point];
        out.code.push_back(store);

        // A hit continues at the instruction after the store.
        out.code[lookup_pc].skip_offset =
            static_cast<int32_t>(out.code.size() - (lookup_pc + 1));
    }

    void emit_plain(NodeId id, bool inside_bracket) {
        const Node& node = ag.graph.node(id);
        for (NodeId input : node.inputs) {
            emit_node(input, inside_bracket);
        }
        Instruction ins;
        switch (node.kind) {
            case NodeKind::ConstFloat:
                ins.op = Opcode::PushConst;
                ins.constant = Value::scalar(std::get<ConstFloatParams>(node.params).value);
                break;
            case NodeKind::ConstColor:
                ins.op = Opcode::PushConst;
                ins.constant = Value::rgb(std::get<ConstColorParams>(node.params).rgb);
                break;
            case NodeKind::Uv:
                ins.op = Opcode::LoadUv;
                ins.uv_channel = std::get<UvParams>(node.params).channel;
                break;
            case NodeKind::Position: ins.op = Opcode::LoadPosition; break;
            case NodeKind::Normal: ins.op = Opcode::LoadNormal; break;
            case NodeKind::IncomingDir: ins.op = Opcode::LoadIncoming; break;
            case NodeKind::TexImage: {
                const auto& p = std::get<TexImageParams>(node.params);
                ins.op = Opcode::TexSample;
                ins.texture = pool.find(p.image);
                ins.wrap = p.wrap;
                if (!ins.texture) {
                    throw CompileError("texture not loaded: " + p.image);
                }
                break;
            }
            case NodeKind::Checker:
                ins.op = Opcode::Checker;
                ins.checker_scale = std::get<CheckerParams>(node.params).scale;
                break;
            case NodeKind::NoiseFbm:
                ins.op = Opcode::Noise;
                ins.noise = std::get<NoiseParams>(node.params);
                break;
            case NodeKind::Add: ins.op = Opcode::Add; break;
            case NodeKind::Sub: ins.op = Opcode::Sub; break;
            case NodeKind::Mul: ins.op = Opcode::Mul; break;
            case NodeKind::Div: ins.op = Opcode::Div; break;
            case NodeKind::Mix: ins.op = Opcode::Mix; break;
            case NodeKind::Clamp: ins.op = Opcode::Clamp; break;
            case NodeKind::Dot: ins.op = Opcode::Dot; break;
            case NodeKind::SinWave: ins.op = Opcode::SinWave; break;
            case NodeKind::ColorRamp:
                ins.op = Opcode::Ramp;
                ins.ramp_index = static_cast<uint32_t>(out.ramps.size());
                out.ramps.push_back(std::get<RampParams>(node.params).stops);
                break;
            case NodeKind::Power: ins.op = Opcode::Power; break;
            case NodeKind::BsdfDiffuse: ins.op = Opcode::BsdfDiffuse; break;
            case NodeKind::BsdfOutput:
                return;  // transparent: the program's value is its input
        }
        out.code.push_back(ins);
    }
};

int stack_delta(Opcode op) {
    switch (op) {
        case Opcode::PushConst:
        case Opcode::LoadUv:
        case Opcode::LoadPosition:
        case Opcode::LoadNormal:
        case Opcode::LoadIncoming:
        case Opcode::TexSample:
        case Opcode::Checker:
        case Opcode::Noise:
            return +1;
        case Opcode::Add:
        case Opcode::Sub:
        case Opcode::Mul:
        case Opcode::Div:
        case Opcode::Dot:
        case Opcode::Power:
            return -1;
        case Opcode::Mix:
            return -2;
        case Opcode::Clamp:
        case Opcode::SinWave:
        case Opcode::Ramp:
        case Opcode::BsdfDiffuse:
        case Opcode::CacheLookup:  // miss path: no effect
        case Opcode::CacheStore:   // peeks, leaves the value
        case Opcode::End:
            return 0;
    }
    return 0;
}

}  // namespace

CompiledProgram compile(const AnalyzedGraph& ag, const TexturePool& pool,
                        const CompileOptions& options) {
    if (ag.cache_points.size() > kMaxCachePoints) {
        throw CompileError("material has " + std::to_string(ag.cache_points.size()) +
                           " cache points; limit is " + std::to_string(kMaxCachePoints));
    }

    CompiledProgram program;
    program.material_id = ag.graph.material_id;
    program.cache_point_count = static_cast<uint32_t>(ag.cache_points.size());

    Emitter emitter(ag, pool, program);
    emitter.emit_node(ag.graph.output_node, /*inside_bracket=*/false);
    Instruction end;
    end.op = Opcode::End;
    program.code.push_back(end);

    // Verify balance and compute the stack bound by linear simulation of
    // the miss path. The hit path pushes one value where the subtree would
    // have left one, so its depth never exceeds the miss path's.
    int depth = 0;
    int max_depth = 0;
    for (const Instruction& ins : program.code) {
        if (ins.op == Opcode::End) break;
        depth += stack_delta(ins.op);
        if (depth <= 0) throw CompileError("stack underflow during compilation");
        max_depth = std::max(max_depth, depth);
    }
    if (depth != 1) throw CompileError("unbalanced stack effect: final depth " +
                                       std::to_string(depth));
    if (max_depth > options.stack_limit) {
        throw CompileError("stack depth " + std::to_string(max_depth) + " exceeds limit " +
                           std::to_string(options.stack_limit));
    }
    program.max_stack = max_depth;
    return program;
}

Value execute(const CompiledProgram& program, const ShadingPoint& sp, const CacheBinding& binding,
              EvalStats& stats) {
    // Per-thread scratch; execute never reenters itself on a thread, and
    // reusing the buffers avoids re-zeroing ~5 KB on every evaluation.
    thread_local Value stack[256];
    thread_local CacheDescriptor pending[kMaxCachePoints];
    int sp_top = 0;

    size_t pc = 0;
    for (;;) {
        const Instruction& ins = program.code[pc++];
        ++stats.instructions_executed;
        switch (ins.op) {
            case Opcode::PushConst: stack[sp_top++] = ins.constant; break;
            case Opcode::LoadUv:
                switch (ins.uv_channel) {
                    case UvChannel::Both: stack[sp_top++] = Value::rgb(sp.uv.x, sp.uv.y, 0.0f); break;
                    case UvChannel::U: stack[sp_top++] = Value::scalar(sp.uv.x); break;
                    case UvChannel::V: stack[sp_top++] = Value::scalar(sp.uv.y); break;
                }
                break;
            case Opcode::LoadPosition:
                stack[sp_top++] = Value::rgb(sp.position.x, sp.position.y, sp.position.z);
                break;
            case Opcode::LoadNormal:
                stack[sp_top++] = Value::rgb(sp.normal.x, sp.normal.y, sp.normal.z);
                break;
            case Opcode::LoadIncoming:
                stack[sp_top++] = Value::rgb(sp.incoming.x, sp.incoming.y, sp.incoming.z);
                break;
            case Opcode::TexSample:
                stack[sp_top++] = Value::rgb(sample_bilinear(ins.texture->image, sp.uv, ins.wrap));
                break;
            case Opcode::Checker:
                stack[sp_top++] = Value::scalar(checker(ins.checker_scale, sp.uv));
                break;
            case Opcode::Noise:
                stack[sp_top++] = Value::scalar(fbm2(ins.noise, sp.uv));
                break;
            case Opcode::Add:
                stack[sp_top - 2] = ops::add(stack[sp_top - 2], stack[sp_top - 1]);
                --sp_top;
                break;
            case Opcode::Sub:
                stack[sp_top - 2] = ops::sub(stack[sp_top - 2], stack[sp_top - 1]);
                --sp_top;
                break;
            case Opcode::Mul:
                stack[sp_top - 2] = ops::mul(stack[sp_top - 2], stack[sp_top - 1]);
                --sp_top;
                break;
            case Opcode::Div:
                stack[sp_top - 2] = ops::div(stack[sp_top - 2], stack[sp_top - 1]);
                --sp_top;
                break;
            case Opcode::Mix:
                stack[sp_top - 3] =
                    ops::mix(stack[sp_top - 3], stack[sp_top - 2], stack[sp_top - 1]);
                sp_top -= 2;
                break;
            case Opcode::Clamp:
                stack[sp_top - 1] = ops::clamp01(stack[sp_top - 1]);
                break;
            case Opcode::Dot:
                stack[sp_top - 2] = ops::dot3(stack[sp_top - 2], stack[sp_top - 1]);
                --sp_top;
                break;
            case Opcode::SinWave:
                stack[sp_top - 1] = ops::sin_wave(stack[sp_top - 1]);
                break;
            case Opcode::Ramp:
                stack[sp_top - 1] = ops::ramp(program.ramps[ins.ramp_index], stack[sp_top - 1]);
                break;
            case Opcode::Power:
                stack[sp_top - 2] = ops::power(stack[sp_top - 2], stack[sp_top - 1]);
                --sp_top;
                break;
            case Opcode::BsdfDiffuse:
                stack[sp_top - 1] = Value::rgb(stack[sp_top - 1].as_rgb());
                break;
            case Opcode::CacheLookup: {
                if (!binding.enabled()) break;
                // The descriptor is computed once here and reused by the
                // matching store, so lookup and store always agree on the key.
                CacheDescriptor desc;
                desc.mat_idx = program.material_id;
                desc.node_idx = ins.node_idx;
                if (ins.uses_uv) {
                    desc.mip_level = mip_level(sp.g1, sp.g2, binding.mip_offset);
                    const auto [tx, ty] = texel_indices(sp.uv, desc.mip_level);
                    desc.texel_x = tx;
                    desc.texel_y = ty;
                }
                if (const auto hit = binding.cache->lookup(desc)) {
                    stack[sp_top++] = ins.scalar_result ? Value::scalar(hit->r) : Value::rgb(*hit);
                    ++stats.nodes_found;
                    pc += static_cast<size_t>(ins.skip_offset);
                } else {
                    pending[ins.bracket] = desc;
                }
                break;
            }
            case Opcode::CacheStore: {
                if (!binding.enabled()) break;
                ++stats.stores_attempted;
                const UpdateResult r =
                    binding.cache->update(pending[ins.bracket], stack[sp_top - 1].as_rgb());
                if (r.outcome == InsertOutcome::Won) ++stats.stores_won;
                break;
            }
            case Opcode::End: {
                stats.max_stack_seen =
                    std::max<uint64_t>(stats.max_stack_seen, static_cast<uint64_t>(sp_top));
                return stack[--sp_top];
            }
        }
        if (static_cast<uint64_t>(sp_top) > stats.max_stack_seen) {
            stats.max_stack_seen = static_cast<uint64_t>(sp_top);
        }
    }
}

std::string disassemble(const CompiledProgram& program) {
    // Collect skip targets so hits read as "-> Ln".
    std::vector<int> label_at(program.code.size() + 1, -1);
    int next_label = 0;
    for (size_t i = 0; i < program.code.size(); ++i) {
        const Instruction& ins = program.code[i];
        if (ins.op == Opcode::CacheLookup) {
            const size_t target = i + 1 + static_cast<size_t>(ins.skip_offset);
            if (label_at[target] < 0) label_at[target] = next_label++;
        }
    }

    std::ostringstream out;
    out << "material " << program.material_id << ", " << program.code.size()
        << " instructions, max_stack " << program.max_stack << "\n";
    for (size_t i = 0; i < program.code.size(); ++i) {
        if (label_at[i] >= 0) out << "L" << label_at[i] << ":\n";
        const Instruction& ins = program.code[i];
        out << "  " << i << ": ";
        switch (ins.op) {
            case Opcode::PushConst: {
                const Color3 c = ins.constant.as_rgb();
                if (ins.constant.is_scalar()) {
                    out << "push_const " << c.r;
                } else {
                    out << "push_const (" << c.r << ", " << c.g << ", " << c.b << ")";
                }
                break;
            }
            case Opcode::LoadUv:
                out << "load_uv";
                if (ins.uv_channel == UvChannel::U) out << ".u";
                if (ins.uv_channel == UvChannel::V) out << ".v";
                break;
            case Opcode::LoadPosition: out << "load_position"; break;
            case Opcode::LoadNormal: out << "load_normal"; break;
            case Opcode::LoadIncoming: out << "load_incoming"; break;
            case Opcode::TexSample:
                out << "tex_sample \"" << (ins.texture ? ins.texture->ref : "?") << "\" "
                    << (ins.wrap == WrapMode::Repeat ? "repeat" : "clamp");
                break;
            case Opcode::Checker: out << "checker scale=" << ins.checker_scale; break;
            case Opcode::Noise:
                out << "noise octaves=" << ins.noise.octaves << " freq=" << ins.noise.frequency
                    << " lac=" << ins.noise.lacunarity << " gain=" << ins.noise.gain;
                break;
            case Opcode::Add: out << "add"; break;
            case Opcode::Sub: out << "sub"; break;
            case Opcode::Mul: out << "mul"; break;
            case Opcode::Div: out << "div"; break;
            case Opcode::Mix: out << "mix"; break;
            case Opcode::Clamp: out << "clamp"; break;
            case Opcode::Dot: out << "dot"; break;
            case Opcode::SinWave: out << "sin_wave"; break;
            case Opcode::Ramp:
                out << "ramp #" << ins.ramp_index << " ("
                    << program.ramps[ins.ramp_index].size() << " stops)";
                break;
            case Opcode::Power: out << "power"; break;
            case Opcode::BsdfDiffuse: out << "bsdf_diffuse"; break;
            case Opcode::CacheLookup:
                out << "cache_lookup node=" << ins.node_idx << " bracket=" << ins.bracket
                    << (ins.uses_uv ? " uv" : " const")
                    << " -> L" << label_at[i + 1 + static_cast<size_t>(ins.skip_offset)];
                break;
            case Opcode::CacheStore:
                out << "cache_store node=" << ins.node_idx << " bracket=" << ins.bracket;
                break;
            case Opcode::End: out << "end"; break;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace matcache
