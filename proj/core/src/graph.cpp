#include "matcache/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace matcache {

using nlohmann::json;

int node_arity(NodeKind kind) {
    switch (kind) {
        case NodeKind::ConstFloat:
        case NodeKind::ConstColor:
        case NodeKind::Uv:
        case NodeKind::Position:
        case NodeKind::Normal:
        case NodeKind::IncomingDir:
        case NodeKind::TexImage:
        case NodeKind::Checker:
        case NodeKind::NoiseFbm:
            return 0;
        case NodeKind::Clamp:
        case NodeKind::SinWave:
        case NodeKind::ColorRamp:
        case NodeKind::BsdfDiffuse:
        case NodeKind::BsdfOutput:
            return 1;
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Dot:
        case NodeKind::Power:
            return 2;
        case NodeKind::Mix:
            return 3;
    }
    return 0;
}

namespace {

struct KindName {
    NodeKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {NodeKind::ConstFloat, "const_float"},
    {NodeKind::ConstColor, "const_color"},
    {NodeKind::Uv, "uv"},
    {NodeKind::Position, "position"},
    {NodeKind::Normal, "normal"},
    {NodeKind::IncomingDir, "incoming"},
    {NodeKind::TexImage, "tex_image"},
    {NodeKind::Checker, "checker"},
    {NodeKind::NoiseFbm, "noise_fbm"},
    {NodeKind::Add, "add"},
    {NodeKind::Sub, "sub"},
    {NodeKind::Mul, "mul"},
    {NodeKind::Div, "div"},
    {NodeKind::Mix, "mix"},
    {NodeKind::Clamp, "clamp"},
    {NodeKind::Dot, "dot"},
    {NodeKind::SinWave, "sin_wave"},
    {NodeKind::ColorRamp, "color_ramp"},
    {NodeKind::Power, "power"},
    {NodeKind::BsdfDiffuse, "bsdf_diffuse"},
    {NodeKind::BsdfOutput, "bsdf_output"},
};

Color3 parse_rgb(const json& j, NodeId id) {
    if (!j.is_array() || j.size() != 3) {
        throw GraphError("rgb parameter must be a 3-element array", id);
    }
    Color3 c{j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
    if (!std::isfinite(c.r) || !std::isfinite(c.g) || !std::isfinite(c.b)) {
        throw GraphError("rgb components must be finite", id);
    }
    return c;
}

NodeParams parse_params(NodeKind kind, const json& params, NodeId id) {
    switch (kind) {
        case NodeKind::ConstFloat: {
            ConstFloatParams p;
            p.value = params.value("value", 0.0f);
            if (!std::isfinite(p.value)) throw GraphError("const_float value must be finite", id);
            return p;
        }
        case NodeKind::ConstColor: {
            ConstColorParams p;
            p.rgb = parse_rgb(params.value("rgb", json::array({0.0, 0.0, 0.0})), id);
            return p;
        }
        case NodeKind::Uv: {
            UvParams p;
            const std::string channel = params.value("channel", "uv");
            if (channel == "uv") {
                p.channel = UvChannel::Both;
            } else if (channel == "u") {
                p.channel = UvChannel::U;
            } else if (channel == "v") {
                p.channel = UvChannel::V;
            } else {
                throw GraphError("unknown uv channel '" + channel + "'", id);
            }
            return p;
        }
        case NodeKind::TexImage: {
            TexImageParams p;
            if (!params.contains("image") || !params["image"].is_string()) {
                throw GraphError("tex_image requires an 'image' reference", id);
            }
            p.image = params["image"].get<std::string>();
            const std::string wrap = params.value("wrap", "repeat");
            if (wrap == "repeat") {
                p.wrap = WrapMode::Repeat;
            } else if (wrap == "clamp") {
                p.wrap = WrapMode::Clamp;
            } else {
                throw GraphError("unknown wrap mode '" + wrap + "'", id);
            }
            return p;
        }
        case NodeKind::Checker: {
            CheckerParams p;
            p.scale = params.value("scale", 1.0f);
            if (!std::isfinite(p.scale)) throw GraphError("checker scale must be finite", id);
            return p;
        }
        case NodeKind::NoiseFbm: {
            NoiseParams p;
            p.octaves = params.value("octaves", 4);
            p.frequency = params.value("frequency", 1.0f);
            p.lacunarity = params.value("lacunarity", 2.0f);
            p.gain = params.value("gain", 0.5f);
            if (p.octaves < 1 || p.octaves > 10) {
                throw GraphError("noise_fbm octaves must be in [1, 10]", id);
            }
            if (!std::isfinite(p.frequency) || !std::isfinite(p.lacunarity) ||
                !std::isfinite(p.gain)) {
                throw GraphError("noise_fbm parameters must be finite", id);
            }
            return p;
        }
        case NodeKind::ColorRamp: {
            RampParams p;
            if (!params.contains("stops") || !params["stops"].is_array() ||
                params["stops"].empty()) {
                throw GraphError("color_ramp requires a non-empty 'stops' array", id);
            }
            for (const auto& stop : params["stops"]) {
                ops::RampStop s;
                s.t = stop.value("t", 0.0f);
                s.color = parse_rgb(stop.value("rgb", json::array({0.0, 0.0, 0.0})), id);
                if (!std::isfinite(s.t)) throw GraphError("ramp stop position must be finite", id);
                p.stops.push_back(s);
            }
            if (!std::is_sorted(p.stops.begin(), p.stops.end(),
                                [](const ops::RampStop& a, const ops::RampStop& b) {
                                    return a.t < b.t;
                                })) {
                throw GraphError("ramp stops must be sorted by position", id);
            }
            return p;
        }
        default:
            return std::monostate{};
    }
}

json params_to_json(const Node& node) {
    json j = json::object();
    switch (node.kind) {
        case NodeKind::ConstFloat:
            j["value"] = std::get<ConstFloatParams>(node.params).value;
            break;
        case NodeKind::ConstColor: {
            const Color3 c = std::get<ConstColorParams>(node.params).rgb;
            j["rgb"] = {c.r, c.g, c.b};
            break;
        }
        case NodeKind::Uv: {
            switch (std::get<UvParams>(node.params).channel) {
                case UvChannel::Both: j["channel"] = "uv"; break;
                case UvChannel::U: j["channel"] = "u"; break;
                case UvChannel::V: j["channel"] = "v"; break;
            }
            break;
        }
        case NodeKind::TexImage: {
            const auto& p = std::get<TexImageParams>(node.params);
            j["image"] = p.image;
            j["wrap"] = p.wrap == WrapMode::Repeat ? "repeat" : "clamp";
            break;
        }
        case NodeKind::Checker:
            j["scale"] = std::get<CheckerParams>(node.params).scale;
            break;
        case NodeKind::NoiseFbm: {
            const auto& p = std::get<NoiseParams>(node.params);
            j["octaves"] = p.octaves;
            j["frequency"] = p.frequency;
            j["lacunarity"] = p.lacunarity;
            j["gain"] = p.gain;
            break;
        }
        case NodeKind::ColorRamp: {
            json stops = json::array();
            for (const auto& s : std::get<RampParams>(node.params).stops) {
                stops.push_back({{"t", s.t}, {"rgb", {s.color.r, s.color.g, s.color.b}}});
            }
            j["stops"] = std::move(stops);
            break;
        }
        default:
            break;
    }
    return j;
}

}  // namespace

std::string_view kind_name(NodeKind kind) {
    for (const auto& entry : kKindNames) {
        if (entry.kind == kind) return entry.name;
    }
    return "unknown";
}

std::optional<NodeKind> kind_from_name(std::string_view name) {
    for (const auto& entry : kKindNames) {
        if (entry.name == name) return entry.kind;
    }
    return std::nullopt;
}

MaterialGraph load_graph(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw GraphError(std::string("material JSON parse error: ") + e.what());
    }

    MaterialGraph graph;
    try {
        graph.material_id = doc.at("material_id").get<uint32_t>();
        graph.output_node = doc.at("output").get<NodeId>();

        const json& nodes = doc.at("nodes");
        if (!nodes.is_array()) throw GraphError("'nodes' must be an array");
        graph.nodes.reserve(nodes.size());

        for (size_t index = 0; index < nodes.size(); ++index) {
            const json& jn = nodes[index];
            const NodeId id = jn.at("id").get<NodeId>();
            if (id != index) {
                throw GraphError("node ids must be dense 0..N-1; found id " + std::to_string(id) +
                                     " at position " + std::to_string(index),
                                 id);
            }
            const std::string kind_str = jn.at("kind").get<std::string>();
            const auto kind = kind_from_name(kind_str);
            if (!kind) throw GraphError("unknown node kind '" + kind_str + "'", id);

            Node node;
            node.kind = *kind;
            node.params = parse_params(*kind, jn.value("params", json::object()), id);
            if (jn.contains("inputs")) {
                for (const auto& in : jn.at("inputs")) {
                    node.inputs.push_back(in.get<NodeId>());
                }
            }
            graph.nodes.push_back(std::move(node));
        }
    } catch (const json::exception& e) {
        throw GraphError(std::string("material JSON schema error: ") + e.what());
    }

    validate_graph(graph);
    return graph;
}

MaterialGraph load_graph_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot open material file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_graph(buffer.str());
}

void validate_graph(const MaterialGraph& graph) {
    if (graph.nodes.empty()) throw GraphError("graph has no nodes");

    size_t output_count = 0;
    for (NodeId id = 0; id < graph.nodes.size(); ++id) {
        const Node& node = graph.nodes[id];
        const int arity = node_arity(node.kind);
        if (static_cast<int>(node.inputs.size()) != arity) {
            throw GraphError("arity mismatch for " + std::string(kind_name(node.kind)) +
                                 ": expected " + std::to_string(arity) + " inputs, got " +
                                 std::to_string(node.inputs.size()),
                             id);
        }
        for (NodeId input : node.inputs) {
            if (input >= graph.nodes.size()) {
                throw GraphError("dangling input id " + std::to_string(input), id);
            }
            if (input >= id) {
                throw GraphError("cycle detected: input " + std::to_string(input) +
                                     " does not precede its consumer",
                                 id);
            }
        }
        if (node.kind == NodeKind::BsdfOutput) ++output_count;
    }

    if (output_count != 1) {
        throw GraphError("graph must contain exactly one bsdf_output node, found " +
                         std::to_string(output_count));
    }
    if (graph.output_node >= graph.nodes.size()) {
        throw GraphError("output node id out of range: " + std::to_string(graph.output_node));
    }
    if (graph.nodes[graph.output_node].kind != NodeKind::BsdfOutput) {
        throw GraphError("output node must be the bsdf_output node", graph.output_node);
    }
}

std::string serialize_graph(const MaterialGraph& graph) {
    json doc;
    doc["material_id"] = graph.material_id;
    doc["output"] = graph.output_node;
    json nodes = json::array();
    for (NodeId id = 0; id < graph.nodes.size(); ++id) {
        const Node& node = graph.nodes[id];
        json jn;
        jn["id"] = id;
        jn["kind"] = std::string(kind_name(node.kind));
        jn["params"] = params_to_json(node);
        jn["inputs"] = node.inputs;
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2);
}

size_t node_count(const MaterialGraph& graph) { return graph.nodes.size(); }

std::vector<NodeId> subtree_nodes(const MaterialGraph& graph, NodeId id) {
    std::vector<bool> seen(graph.nodes.size(), false);
    std::vector<NodeId> stack{id};
    seen[id] = true;
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        for (NodeId input : graph.nodes[n].inputs) {
            if (!seen[input]) {
                seen[input] = true;
                stack.push_back(input);
            }
        }
    }
    std::vector<NodeId> result;
    for (NodeId n = 0; n < seen.size(); ++n) {
        if (seen[n]) result.push_back(n);
    }
    return result;
}

bool graphs_equal(const MaterialGraph& a, const MaterialGraph& b) {
    // Params comparison goes through the serialized form; it is canonical.
    return a.material_id == b.material_id && a.output_node == b.output_node &&
           a.nodes.size() == b.nodes.size() && serialize_graph(a) == serialize_graph(b);
}

}  // namespace matcache
