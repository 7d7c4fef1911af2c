#pragma once

#include <span>
#include <vector>

#include "matcache/geom.hpp"
#include "matcache/graph.hpp"

namespace matcache {

/// Applies a pure-math node (add..power) to already-evaluated inputs.
/// Shared by the reference evaluator, constant folding, and the compiler's
/// instruction kernels.
Value apply_math_node(const Node& node, std::span<const Value> inputs);

/// Recursive post-order evaluation of the graph at a shading point; returns
/// the BSDF base color (the value of the output node's input). Pure and
/// reentrant: equal inputs give bit-identical outputs. No memoization —
/// shared nodes are recomputed, which is what makes this the oracle.
///
/// When `trace` is non-null it is resized to the node count and receives
/// the value of every node reachable from the output.
Value eval_reference(const MaterialGraph& graph, const ShadingPoint& sp, const TexturePool& pool,
                     std::vector<Value>* trace = nullptr);

/// Evaluates a single node (and its subtree) directly.
Value eval_reference_node(const MaterialGraph& graph, NodeId id, const ShadingPoint& sp,
                          const TexturePool& pool);

}  // namespace matcache
