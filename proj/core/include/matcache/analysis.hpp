#pragma once

#include "matcache/graph.hpp"

namespace matcache {

/// What a node's subtree depends on, as a three-point lattice:
/// Const < Uv < Other; join is max. A node is cacheable when its class is
/// Const or Uv — nothing shading-point specific except texture coordinates.
enum class DepClass : uint8_t { Const = 0, Uv = 1, Other = 2 };

inline DepClass join(DepClass a, DepClass b) { return a < b ? b : a; }

/// The dependence a node introduces by itself, before joining its inputs.
DepClass intrinsic_class(NodeKind kind);

inline bool is_cacheable_class(DepClass c) { return c != DepClass::Other; }

constexpr NodeId kDroppedNode = ~NodeId{0};

struct FoldResult {
    MaterialGraph graph;
    /// remap[old_id] = new id, or kDroppedNode for nodes folded away.
    std::vector<NodeId> remap;
};

/// Replaces every pure-math node whose inputs are all constants with the
/// constant it evaluates to, then drops unreachable nodes and re-densifies
/// ids. The graph's value at every shading point is unchanged bit-for-bit.
FoldResult fold_constants(const MaterialGraph& graph);

/// Per-node dependence class: the join of the node's intrinsic class and
/// its inputs' classes.
std::vector<DepClass> classify_deps(const MaterialGraph& graph);

struct AnalysisOptions {
    /// Smallest subtree worth caching; single fetches cost more to cache
    /// than to recompute.
    int min_subtree_size = 3;
};

/// Graph after folding plus everything the compiler needs: the dependence
/// map, the selected cache points (maximal cacheable nodes), and whether
/// each cache point's subtree reads uv.
struct AnalyzedGraph {
    MaterialGraph graph;
    std::vector<DepClass> dep;
    std::vector<NodeId> cache_points;  // ascending node ids
    std::vector<bool> uses_uv;         // per node: subtree contains a uv-intrinsic node
    std::vector<NodeId> fold_remap;    // diagnostics: pre-fold id -> post-fold id
};

/// Nodes with a cacheable class, subtree size >= min_subtree_size, whose
/// consumers (transitively) are all Other-class — the highest cacheable
/// nodes in the network.
std::vector<NodeId> select_cache_points(const MaterialGraph& graph,
                                        const std::vector<DepClass>& dep, int min_subtree_size);

/// fold_constants + classify_deps + select_cache_points in one pass.
AnalyzedGraph analyze(const MaterialGraph& graph, const AnalysisOptions& options = {});

/// Dep map and cache points as JSON, for the `analyze` CLI subcommand.
std::string analysis_to_json(const AnalyzedGraph& ag);

/// GraphViz dump with each cache-point subtree outlined as a cluster.
std::string analysis_to_dot(const AnalyzedGraph& ag);

}  // namespace matcache
