#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "matcache/noise.hpp"
#include "matcache/texture.hpp"
#include "matcache/value.hpp"

namespace matcache {

using NodeId = uint32_t;

enum class NodeKind : uint8_t {
    ConstFloat,
    ConstColor,
    Uv,
    Position,
    Normal,
    IncomingDir,
    TexImage,
    Checker,
    NoiseFbm,
    Add,
    Sub,
    Mul,
    Div,
    Mix,
    Clamp,
    Dot,
    SinWave,
    ColorRamp,
    Power,
    BsdfDiffuse,
    BsdfOutput,
};

enum class UvChannel : uint8_t { Both, U, V };

struct ConstFloatParams {
    float value = 0.0f;
};
struct ConstColorParams {
    Color3 rgb;
};
struct UvParams {
    UvChannel channel = UvChannel::Both;
};
struct TexImageParams {
    std::string image;
    WrapMode wrap = WrapMode::Repeat;
};
struct CheckerParams {
    float scale = 1.0f;
};
struct RampParams {
    std::vector<ops::RampStop> stops;
};

using NodeParams = std::variant<std::monostate, ConstFloatParams, ConstColorParams, UvParams,
                                TexImageParams, CheckerParams, NoiseParams, RampParams>;

struct Node {
    NodeKind kind = NodeKind::ConstFloat;
    NodeParams params;
    std::vector<NodeId> inputs;
};

/// A validated material network. Nodes are stored in evaluation order:
/// node ids are dense 0..N-1, every input refers to a lower id, and
/// `output_node` is the unique BsdfOutput. Immutable after load; safe to
/// share across threads.
struct MaterialGraph {
    uint32_t material_id = 0;
    std::vector<Node> nodes;
    NodeId output_node = 0;

    const Node& node(NodeId id) const { return nodes[id]; }
    size_t size() const { return nodes.size(); }
};

/// Validation or parse failure; carries the offending node id when known.
class GraphError : public std::runtime_error {
public:
    explicit GraphError(const std::string& message, std::optional<NodeId> node = std::nullopt)
        : std::runtime_error(node ? message + " (node " + std::to_string(*node) + ")" : message),
          node_id(node) {}

    std::optional<NodeId> node_id;
};

int node_arity(NodeKind kind);
std::string_view kind_name(NodeKind kind);
std::optional<NodeKind> kind_from_name(std::string_view name);

/// Parses and validates a material JSON document.
/// Throws GraphError on parse errors, cycles/forward references, arity
/// mismatches, unknown kinds, and dangling input ids.
MaterialGraph load_graph(std::string_view json_text);
MaterialGraph load_graph_file(const std::filesystem::path& path);

/// Serializes a graph back to its JSON interchange form. Round-trips
/// id-for-id through load_graph.
std::string serialize_graph(const MaterialGraph& graph);

/// Re-checks every structural invariant on an in-memory graph.
void validate_graph(const MaterialGraph& graph);

size_t node_count(const MaterialGraph& graph);

/// Transitive input closure of `id`, including `id` itself; ascending,
/// deduplicated (shared nodes appear once).
std::vector<NodeId> subtree_nodes(const MaterialGraph& graph, NodeId id);

/// Graphs compare equal when every node (kind, params, inputs), the
/// material id, and the output node match.
bool graphs_equal(const MaterialGraph& a, const MaterialGraph& b);

}  // namespace matcache
