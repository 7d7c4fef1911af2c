#include "matcache/eval.hpp"

#include "matcache/noise.hpp"

namespace matcache {

Value apply_math_node(const Node& node, std::span<const Value> inputs) {
    switch (node.kind) {
        case NodeKind::Add: return ops::add(inputs[0], inputs[1]);
        case NodeKind::Sub: return ops::sub(inputs[0], inputs[1]);
        case NodeKind::Mul: return ops::mul(inputs[0], inputs[1]);
        case NodeKind::Div: return ops::div(inputs[0], inputs[1]);
        case NodeKind::Mix: return ops::mix(inputs[0], inputs[1], inputs[2]);
        case NodeKind::Clamp: return ops::clamp01(inputs[0]);
        case NodeKind::Dot: return ops::dot3(inputs[0], inputs[1]);
        case NodeKind::SinWave: return ops::sin_wave(inputs[0]);
        case NodeKind::ColorRamp:
            return ops::ramp(std::get<RampParams>(node.params).stops, inputs[0]);
        case NodeKind::Power: return ops::power(inputs[0], inputs[1]);
        default:
            throw GraphError("apply_math_node called on non-math kind " +
                             std::string(kind_name(node.kind)));
    }
}

namespace {

struct Evaluator {
    const MaterialGraph& graph;
    const ShadingPoint& sp;
    const TexturePool& pool;
    std::vector<Value>* trace;

    Value eval(NodeId id) const {
        const Node& node = graph.node(id);
        Value result;
        switch (node.kind) {
            case NodeKind::ConstFloat:
                result = Value::scalar(std::get<ConstFloatParams>(node.params).value);
                break;
            case NodeKind::ConstColor:
                result = Value::rgb(std::get<ConstColorParams>(node.params).rgb);
                break;
            case NodeKind::Uv:
                switch (std::get<UvParams>(node.params).channel) {
                    case UvChannel::Both: result = Value::rgb(sp.uv.x, sp.uv.y, 0.0f); break;
                    case UvChannel::U: result = Value::scalar(sp.uv.x); break;
                    case UvChannel::V: result = Value::scalar(sp.uv.y); break;
                }
                break;
            case NodeKind::Position:
                result = Value::rgb(sp.position.x, sp.position.y, sp.position.z);
                break;
            case NodeKind::Normal:
                result = Value::rgb(sp.normal.x, sp.normal.y, sp.normal.z);
                break;
            case NodeKind::IncomingDir:
                result = Value::rgb(sp.incoming.x, sp.incoming.y, sp.incoming.z);
                break;
            case NodeKind::TexImage: {
                const auto& p = std::get<TexImageParams>(node.params);
                const Texture* tex = pool.find(p.image);
                if (!tex) throw GraphError("texture not loaded: " + p.image, id);
                result = Value::rgb(sample_bilinear(tex->image, sp.uv, p.wrap));
                break;
            }
            case NodeKind::Checker:
                result = Value::scalar(checker(std::get<CheckerParams>(node.params).scale, sp.uv));
                break;
            case NodeKind::NoiseFbm:
                result = Value::scalar(fbm2(std::get<NoiseParams>(node.params), sp.uv));
                break;
            case NodeKind::BsdfDiffuse:
                result = Value::rgb(eval(node.inputs[0]).as_rgb());
                break;
            case NodeKind::BsdfOutput:
                result = eval(node.inputs[0]);
                break;
            default: {
                Value ins[3];
                for (size_t i = 0; i < node.inputs.size(); ++i) ins[i] = eval(node.inputs[i]);
                result = apply_math_node(node, std::span<const Value>(ins, node.inputs.size()));
                break;
            }
        }
        if (trace) (*trace)[id] = result;
        return result;
    }
};

}  // namespace

Value eval_reference(const MaterialGraph& graph, const ShadingPoint& sp, const TexturePool& pool,
                     std::vector<Value>* trace) {
    if (trace) trace->assign(graph.size(), Value{});
    return Evaluator{graph, sp, pool, trace}.eval(graph.output_node);
}

Value eval_reference_node(const MaterialGraph& graph, NodeId id, const ShadingPoint& sp,
                          const TexturePool& pool) {
    return Evaluator{graph, sp, pool, nullptr}.eval(id);
}

}  // namespace matcache
