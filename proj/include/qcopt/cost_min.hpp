#pragma once

#include "qcopt/core.hpp"

#include <cstdint>
#include <vector>

namespace qcopt {

/// Minimum cost over sections with a per-section quality floor Q. Without a
/// latency SLA the per-section greedy is optimal; with an SLA and uniform
/// section sizes the problem is a min-cost max-flow.
RoutingPlan greedy_cost_min(const RoutingInstance& instance);

struct FlowEdge {
    int from = 0;
    int to = 0;
    std::int64_t capacity = 0;
    double cost = 0.0;
};

/// Bipartite network: source -> section (cap 1) -> model (cap 1, cost C_ij,
/// present iff S_ij >= Q) -> sink (cap = normalized token capacity).
struct FlowNetwork {
    int num_sections = 0;
    int num_models = 0;
    std::vector<FlowEdge> edges;
    std::vector<std::int64_t> token_capacity;       // N_i = floor(L / L_i)
    std::vector<std::int64_t> section_capacity;     // floor(N_i / d)

    int source() const { return 0; }
    int section_node(int j) const { return 1 + j; }
    int model_node(int i) const { return 1 + num_sections + i; }
    int sink() const { return 1 + num_sections + num_models; }
    int num_nodes() const { return num_sections + num_models + 2; }
};

/// Common (input + estimated output) size when every (section, model) pair
/// has the same total; throws PreconditionError otherwise.
std::int64_t uniform_section_tokens(const RoutingInstance& instance);

/// Throws PreconditionError when sizes are not all equal to `section_tokens`
/// or when the instance has no latency SLA.
FlowNetwork build_flow(const RoutingInstance& instance, std::int64_t section_tokens);

struct FlowResult {
    std::int64_t flow_value = 0;
    std::vector<int> assignment;     // model index per section, or kUnassigned
    double total_cost = 0.0;
    std::vector<std::int64_t> edge_flow;  // parallel to FlowNetwork::edges
};

/// Successive shortest augmenting paths with Bellman-Ford distances. Returns
/// the maximum flow of minimum cost; a flow below num_sections is a partial
/// assignment. Throws StructuralError on a negative residual cycle.
FlowResult min_cost_max_flow(const FlowNetwork& network);

/// build_flow + min_cost_max_flow, packaged as a plan. `feasible` is false
/// when some section cannot be placed.
RoutingPlan solve_cost_min_flow(const RoutingInstance& instance);

/// Exhaustive minimum-cost assignment under the quality floor and SLA.
/// Throws InstanceTooLargeError above kOracleGuard and InfeasibleError when
/// nothing satisfies the constraints.
RoutingPlan cost_min_oracle(const RoutingInstance& instance);

/// Not optimal. Sections in index order take the cheapest model that meets
/// the quality floor and still has latency headroom; sections with no such
/// model stay unassigned.
RoutingPlan greedy_latency_heuristic(const RoutingInstance& instance);

enum class CostMinMode { Auto, Greedy, Flow, Oracle, Heuristic };

/// Auto: greedy without SLA, flow with uniform sizes, oracle when K^n fits
/// the guard, heuristic otherwise.
RoutingPlan solve_cost_min(const RoutingInstance& instance, CostMinMode mode = CostMinMode::Auto);

CostMinMode parse_cost_min_mode(const std::string& name);

}  // namespace qcopt
