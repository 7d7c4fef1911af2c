#include "matcache/analysis.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "matcache/eval.hpp"

namespace matcache {

DepClass intrinsic_class(NodeKind kind) {
    switch (kind) {
        case NodeKind::ConstFloat:
        case NodeKind::ConstColor:
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Mix:
        case NodeKind::Clamp:
        case NodeKind::Dot:
        case NodeKind::SinWave:
        case NodeKind::ColorRamp:
        case NodeKind::Power:
            return DepClass::Const;
        case NodeKind::Uv:
        case NodeKind::TexImage:
        case NodeKind::Checker:
        case NodeKind::NoiseFbm:
            return DepClass::Uv;
        case NodeKind::Position:
        case NodeKind::Normal:
        case NodeKind::IncomingDir:
        case NodeKind::BsdfDiffuse:
        case NodeKind::BsdfOutput:
            return DepClass::Other;
    }
    return DepClass::Other;
}

namespace {

bool is_const_kind(NodeKind kind) {
    return kind == NodeKind::ConstFloat || kind == NodeKind::ConstColor;
}

bool is_math_kind(NodeKind kind) {
    return intrinsic_class(kind) == DepClass::Const && node_arity(kind) > 0;
}

Node make_const_node(const Value& v) {
    Node node;
    if (v.is_scalar()) {
        node.kind = NodeKind::ConstFloat;
        node.params = ConstFloatParams{v.as_scalar()};
    } else {
        node.kind = NodeKind::ConstColor;
        node.params = ConstColorParams{v.as_rgb()};
    }
    return node;
}

Value const_value(const Node& node) {
    if (node.kind == NodeKind::ConstFloat) {
        return Value::scalar(std::get<ConstFloatParams>(node.params).value);
    }
    return Value::rgb(std::get<ConstColorParams>(node.params).rgb);
}

}  // namespace

FoldResult fold_constants(const MaterialGraph& graph) {
    // Ids are topologically ordered, so one forward pass folds chains fully.
    std::vector<Node> folded = graph.nodes;
    for (NodeId id = 0; id < folded.size(); ++id) {
        Node& node = folded[id];
        if (!is_math_kind(node.kind)) continue;
        const bool all_const = std::all_of(node.inputs.begin(), node.inputs.end(),
                                           [&](NodeId in) { return is_const_kind(folded[in].kind); });
        if (!all_const) continue;

        Value ins[3];
        for (size_t i = 0; i < node.inputs.size(); ++i) ins[i] = const_value(folded[node.inputs[i]]);
        const Value v = apply_math_node(node, std::span<const Value>(ins, node.inputs.size()));
        node = make_const_node(v);
    }

    // Drop nodes no longer reachable from the output and re-densify ids.
    std::vector<bool> live(folded.size(), false);
    live[graph.output_node] = true;
    for (NodeId id = graph.output_node + 1; id-- > 0;) {
        if (!live[id]) continue;
        for (NodeId input : folded[id].inputs) live[input] = true;
    }

    FoldResult result;
    result.remap.assign(folded.size(), kDroppedNode);
    result.graph.material_id = graph.material_id;
    for (NodeId id = 0; id < folded.size(); ++id) {
        if (!live[id]) continue;
        result.remap[id] = static_cast<NodeId>(result.graph.nodes.size());
        Node node = std::move(folded[id]);
        for (NodeId& input : node.inputs) input = result.remap[input];
        result.graph.nodes.push_back(std::move(node));
    }
    result.graph.output_node = result.remap[graph.output_node];
    return result;
}

std::vector<DepClass> classify_deps(const MaterialGraph& graph) {
    std::vector<DepClass> dep(graph.size());
    for (NodeId id = 0; id < graph.size(); ++id) {
        DepClass c = intrinsic_class(graph.node(id).kind);
        for (NodeId input : graph.node(id).inputs) c = join(c, dep[input]);
        dep[id] = c;
    }
    return dep;
}

std::vector<NodeId> select_cache_points(const MaterialGraph& graph,
                                        const std::vector<DepClass>& dep, int min_subtree_size) {
    // blocked[n]: some ancestor of n is itself cacheable-classed, so n can
    // never be maximal. Consumers always have higher ids; sweep downward.
    std::vector<bool> blocked(graph.size(), false);
    for (NodeId id = graph.size(); id-- > 0;) {
        const bool propagate = blocked[id] || is_cacheable_class(dep[id]);
        if (!propagate) continue;
        for (NodeId input : graph.node(id).inputs) blocked[input] = true;
    }

    std::vector<NodeId> points;
    for (NodeId id = 0; id < graph.size(); ++id) {
        if (!is_cacheable_class(dep[id]) || blocked[id]) continue;
        if (subtree_nodes(graph, id).size() < static_cast<size_t>(min_subtree_size)) continue;
        points.push_back(id);
    }
    return points;
}

AnalyzedGraph analyze(const MaterialGraph& graph, const AnalysisOptions& options) {
    AnalyzedGraph ag;
    FoldResult folded = fold_constants(graph);
    ag.graph = std::move(folded.graph);
    ag.fold_remap = std::move(folded.remap);
    ag.dep = classify_deps(ag.graph);
    ag.cache_points = select_cache_points(ag.graph, ag.dep, options.min_subtree_size);

    ag.uses_uv.assign(ag.graph.size(), false);
    for (NodeId id = 0; id < ag.graph.size(); ++id) {
        bool uv = intrinsic_class(ag.graph.node(id).kind) == DepClass::Uv;
        for (NodeId input : ag.graph.node(id).inputs) uv = uv || ag.uses_uv[input];
        ag.uses_uv[id] = uv;
    }
    return ag;
}

namespace {

const char* dep_name(DepClass c) {
    switch (c) {
        case DepClass::Const: return "const";
        case DepClass::Uv: return "uv";
        case DepClass::Other: return "other";
    }
    return "?";
}

}  // namespace

std::string analysis_to_json(const AnalyzedGraph& ag) {
    nlohmann::json doc;
    doc["material_id"] = ag.graph.material_id;
    doc["node_count"] = ag.graph.size();

    nlohmann::json dep = nlohmann::json::array();
    for (NodeId id = 0; id < ag.graph.size(); ++id) {
        dep.push_back({{"id", id},
                       {"kind", std::string(kind_name(ag.graph.node(id).kind))},
                       {"dep", dep_name(ag.dep[id])}});
    }
    doc["dep"] = std::move(dep);

    nlohmann::json points = nlohmann::json::array();
    for (NodeId p : ag.cache_points) {
        points.push_back({{"node", p},
                          {"uses_uv", ag.uses_uv[p]},
                          {"subtree_size", subtree_nodes(ag.graph, p).size()}});
    }
    doc["cache_points"] = std::move(points);
    return doc.dump(2);
}

std::string analysis_to_dot(const AnalyzedGraph& ag) {
    std::ostringstream out;
    out << "digraph material_" << ag.graph.material_id << " {\n";
    out << "  rankdir=BT;\n  node [shape=box, fontsize=10];\n";

    std::vector<int> cluster_of(ag.graph.size(), -1);
    for (size_t c = 0; c < ag.cache_points.size(); ++c) {
        for (NodeId n : subtree_nodes(ag.graph, ag.cache_points[c])) {
            if (cluster_of[n] < 0) cluster_of[n] = static_cast<int>(c);
        }
    }

    for (size_t c = 0; c < ag.cache_points.size(); ++c) {
        out << "  subgraph cluster_" << c << " {\n";
        out << "    color=blue; penwidth=2; label=\"cache point " << ag.cache_points[c]
            << "\";\n";
        for (NodeId n = 0; n < ag.graph.size(); ++n) {
            if (cluster_of[n] == static_cast<int>(c)) {
                out << "    n" << n << ";\n";
            }
        }
        out << "  }\n";
    }

    for (NodeId n = 0; n < ag.graph.size(); ++n) {
        out << "  n" << n << " [label=\"" << n << ": " << kind_name(ag.graph.node(n).kind)
            << "\\n" << dep_name(ag.dep[n]) << "\"";
        if (std::find(ag.cache_points.begin(), ag.cache_points.end(), n) !=
            ag.cache_points.end()) {
            out << ", style=filled, fillcolor=gold";
        } else if (ag.dep[n] == DepClass::Uv) {
            out << ", style=filled, fillcolor=lightcoral";
        }
        out << "];\n";
    }
    for (NodeId n = 0; n < ag.graph.size(); ++n) {
        for (NodeId input : ag.graph.node(n).inputs) {
            out << "  n" << input << " -> n" << n << ";\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace matcache
