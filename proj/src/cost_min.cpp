#include "qcopt/cost_min.hpp"

#include "qcopt/budget_opt.hpp"
#include "qcopt/error.hpp"

#include <cmath>
#include <limits>

namespace qcopt {

namespace {

double require_floor(const RoutingInstance& instance) {
    if (!instance.quality_floor()) {
        throw ValidationError("cost-min requires a quality floor");
    }
    return *instance.quality_floor();
}

bool meets_floor(const RoutingInstance& instance, int section, int model, double floor) {
    return instance.scores()(section, model) >= floor;
}

double sla_slack(double sla) { return 1e-9 * std::max(1.0, sla); }

}  // namespace

RoutingPlan greedy_cost_min(const RoutingInstance& instance) {
    const double floor = require_floor(instance);
    if (instance.latency_sla()) {
        throw PreconditionError(
            "greedy cost-min is exact only without a latency SLA; use flow, oracle or heuristic");
    }
    const int n = instance.num_sections();
    const int k = instance.num_models();
    const auto& costs = instance.costs();
    const auto& scores = instance.scores();
    std::vector<int> assignment(n);
    for (int j = 0; j < n; ++j) {
        int best = kUnassigned;
        for (int i = 0; i < k; ++i) {
            if (!meets_floor(instance, j, i, floor)) continue;
            if (best == kUnassigned) {
                best = i;
                continue;
            }
            const double diff = costs(j, i) - costs(j, best);
            if (diff < -kCurrencyTolerance ||
                (diff <= kCurrencyTolerance && scores(j, i) > scores(j, best))) {
                best = i;
            }
        }
        if (best == kUnassigned) {
            const double top = scores.row(j).maxCoeff();
            throw InfeasibleSectionError("section '" + instance.sections()[j].id +
                                             "' has no model meeting the quality floor " +
                                             std::to_string(floor) + " (best score " +
                                             std::to_string(top) + ")",
                                         instance.sections()[j].id, top);
        }
        assignment[j] = best;
    }
    return evaluate_assignment(instance, std::move(assignment));
}

std::int64_t uniform_section_tokens(const RoutingInstance& instance) {
    std::int64_t d = -1;
    for (const auto& section : instance.sections()) {
        for (const auto& model : instance.models()) {
            const auto total =
                section.input_tokens(model.id) + estimated_output_tokens(section, model);
            if (d < 0) {
                d = total;
            } else if (total != d) {
                throw PreconditionError("section '" + section.id + "' has " +
                                        std::to_string(total) + " tokens under model '" +
                                        model.id + "', expected the uniform size " +
                                        std::to_string(d));
            }
        }
    }
    return std::max<std::int64_t>(d, 0);
}

FlowNetwork build_flow(const RoutingInstance& instance, std::int64_t section_tokens) {
    const auto sla = instance.latency_sla();
    if (!sla) {
        throw PreconditionError("flow construction requires a latency SLA");
    }
    const double floor = instance.quality_floor().value_or(0.0);
    const int n = instance.num_sections();
    const int k = instance.num_models();
    for (const auto& section : instance.sections()) {
        for (const auto& model : instance.models()) {
            const auto total =
                section.input_tokens(model.id) + estimated_output_tokens(section, model);
            if (total != section_tokens) {
                throw PreconditionError("section '" + section.id + "' is not of uniform size " +
                                        std::to_string(section_tokens));
            }
        }
    }

    FlowNetwork net;
    net.num_sections = n;
    net.num_models = k;
    net.token_capacity.resize(k);
    net.section_capacity.resize(k);
    for (int i = 0; i < k; ++i) {
        const double rate = instance.models()[i].latency_per_token;
        // A model with zero latency, or sections of zero size, never binds.
        if (rate <= 0.0) {
            net.token_capacity[i] = std::numeric_limits<std::int64_t>::max();
            net.section_capacity[i] = n;
            continue;
        }
        const double tokens = std::floor(*sla / rate);
        net.token_capacity[i] = tokens >= 9.2e18 ? std::numeric_limits<std::int64_t>::max()
                                                 : static_cast<std::int64_t>(tokens);
        net.section_capacity[i] = section_tokens == 0
                                      ? n
                                      : std::min<std::int64_t>(net.token_capacity[i] / section_tokens, n);
    }

    for (int j = 0; j < n; ++j) {
        net.edges.push_back({net.source(), net.section_node(j), 1, 0.0});
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < k; ++i) {
            if (meets_floor(instance, j, i, floor)) {
                net.edges.push_back({net.section_node(j), net.model_node(i), 1, instance.costs()(j, i)});
            }
        }
    }
    for (int i = 0; i < k; ++i) {
        net.edges.push_back({net.model_node(i), net.sink(), net.section_capacity[i], 0.0});
    }
    return net;
}

FlowResult min_cost_max_flow(const FlowNetwork& network) {
    struct Arc {
        int to;
        std::int64_t residual;
        double cost;
        std::size_t reverse;
        long edge;  // index into network.edges, -1 for reverse arcs
    };
    const int nodes = network.num_nodes();
    std::vector<std::vector<Arc>> graph(nodes);
    for (std::size_t e = 0; e < network.edges.size(); ++e) {
        const auto& edge = network.edges[e];
        if (edge.from < 0 || edge.from >= nodes || edge.to < 0 || edge.to >= nodes ||
            edge.capacity < 0) {
            throw StructuralError("malformed flow edge " + std::to_string(e));
        }
        graph[edge.from].push_back({edge.to, edge.capacity, edge.cost, graph[edge.to].size(),
                                    static_cast<long>(e)});
        graph[edge.to].push_back({edge.from, 0, -edge.cost, graph[edge.from].size() - 1, -1});
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr double kRelax = 1e-12;
    FlowResult result;
    result.edge_flow.assign(network.edges.size(), 0);

    std::vector<double> dist(nodes);
    std::vector<int> prev_node(nodes);
    std::vector<std::size_t> prev_arc(nodes);
    for (;;) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(prev_node.begin(), prev_node.end(), -1);
        dist[network.source()] = 0.0;
        bool changed = true;
        int rounds = 0;
        while (changed) {
            changed = false;
            if (rounds++ > nodes) {
                throw StructuralError("negative-cost cycle in residual network");
            }
            for (int u = 0; u < nodes; ++u) {
                if (dist[u] == kInf) continue;
                for (std::size_t a = 0; a < graph[u].size(); ++a) {
                    const Arc& arc = graph[u][a];
                    if (arc.residual <= 0) continue;
                    const double candidate = dist[u] + arc.cost;
                    if (candidate < dist[arc.to] - kRelax) {
                        dist[arc.to] = candidate;
                        prev_node[arc.to] = u;
                        prev_arc[arc.to] = a;
                        changed = true;
                    }
                }
            }
        }
        if (dist[network.sink()] == kInf) break;

        std::int64_t push = std::numeric_limits<std::int64_t>::max();
        for (int v = network.sink(); v != network.source(); v = prev_node[v]) {
            push = std::min(push, graph[prev_node[v]][prev_arc[v]].residual);
        }
        for (int v = network.sink(); v != network.source(); v = prev_node[v]) {
            Arc& arc = graph[prev_node[v]][prev_arc[v]];
            arc.residual -= push;
            graph[arc.to][arc.reverse].residual += push;
            if (arc.edge >= 0) {
                result.edge_flow[arc.edge] += push;
            } else {
                result.edge_flow[graph[arc.to][arc.reverse].edge] -= push;
            }
        }
        result.flow_value += push;
    }

    result.assignment.assign(network.num_sections, kUnassigned);
    for (std::size_t e = 0; e < network.edges.size(); ++e) {
        const auto& edge = network.edges[e];
        result.total_cost += edge.cost * static_cast<double>(result.edge_flow[e]);
        const bool section_to_model = edge.from >= 1 && edge.from <= network.num_sections &&
                                      edge.to > network.num_sections &&
                                      edge.to <= network.num_sections + network.num_models;
        if (section_to_model && result.edge_flow[e] > 0) {
            result.assignment[edge.from - 1] = edge.to - 1 - network.num_sections;
        }
    }
    return result;
}

RoutingPlan solve_cost_min_flow(const RoutingInstance& instance) {
    require_floor(instance);
    const auto net = build_flow(instance, uniform_section_tokens(instance));
    auto flow = min_cost_max_flow(net);
    RoutingPlan plan = evaluate_assignment(instance, std::move(flow.assignment));
    plan.feasible = flow.flow_value == instance.num_sections();
    return plan;
}

RoutingPlan cost_min_oracle(const RoutingInstance& instance) {
    const double floor = require_floor(instance);
    const int n = instance.num_sections();
    const int k = instance.num_models();
    if (assignment_space_size(n, k) > kOracleGuard) {
        throw InstanceTooLargeError("cost-min oracle refuses K^n above " +
                                    std::to_string(kOracleGuard));
    }
    const auto sla = instance.latency_sla();
    std::vector<int> current(n, 0), best;
    Eigen::VectorXd latency = Eigen::VectorXd::Zero(k);
    double best_cost = std::numeric_limits<double>::infinity();
    bool found = false;

    auto search = [&](auto&& self, int j, double cost) -> void {
        if (cost > best_cost + kCurrencyTolerance) return;
        if (j == n) {
            if (!found || cost < best_cost - kCurrencyTolerance) {
                found = true;
                best_cost = cost;
                best = current;
            }
            return;
        }
        for (int i = 0; i < k; ++i) {
            if (!meets_floor(instance, j, i, floor)) continue;
            const double lat = latency(i) + instance.latencies()(j, i);
            if (sla && lat > *sla + sla_slack(*sla)) continue;
            const double saved = latency(i);
            latency(i) = lat;
            current[j] = i;
            self(self, j + 1, cost + instance.costs()(j, i));
            latency(i) = saved;
        }
    };
    search(search, 0, 0.0);
    if (!found) {
        throw InfeasibleError("no assignment satisfies the quality floor and latency SLA");
    }
    return evaluate_assignment(instance, std::move(best));
}

RoutingPlan greedy_latency_heuristic(const RoutingInstance& instance) {
    const double floor = require_floor(instance);
    const int n = instance.num_sections();
    const int k = instance.num_models();
    const auto sla = instance.latency_sla();
    Eigen::VectorXd used = Eigen::VectorXd::Zero(k);
    std::vector<int> assignment(n, kUnassigned);
    for (int j = 0; j < n; ++j) {
        int best = kUnassigned;
        for (int i = 0; i < k; ++i) {
            if (!meets_floor(instance, j, i, floor)) continue;
            if (sla && used(i) + instance.latencies()(j, i) > *sla + sla_slack(*sla)) continue;
            if (best == kUnassigned ||
                instance.costs()(j, i) < instance.costs()(j, best) - kCurrencyTolerance) {
                best = i;
            }
        }
        if (best != kUnassigned) {
            used(best) += instance.latencies()(j, best);
            assignment[j] = best;
        }
    }
    return evaluate_assignment(instance, std::move(assignment));
}

RoutingPlan solve_cost_min(const RoutingInstance& instance, CostMinMode mode) {
    switch (mode) {
        case CostMinMode::Greedy: return greedy_cost_min(instance);
        case CostMinMode::Flow: return solve_cost_min_flow(instance);
        case CostMinMode::Oracle: return cost_min_oracle(instance);
        case CostMinMode::Heuristic: return greedy_latency_heuristic(instance);
        case CostMinMode::Auto: break;
    }
    if (!instance.latency_sla()) return greedy_cost_min(instance);
    bool uniform = true;
    try {
        uniform_section_tokens(instance);
    } catch (const PreconditionError&) {
        uniform = false;
    }
    if (uniform) return solve_cost_min_flow(instance);
    if (assignment_space_size(instance.num_sections(), instance.num_models()) <= kOracleGuard) {
        return cost_min_oracle(instance);
    }
    return greedy_latency_heuristic(instance);
}

CostMinMode parse_cost_min_mode(const std::string& name) {
    if (name == "auto") return CostMinMode::Auto;
    if (name == "greedy") return CostMinMode::Greedy;
    if (name == "flow") return CostMinMode::Flow;
    if (name == "oracle") return CostMinMode::Oracle;
    if (name == "heuristic") return CostMinMode::Heuristic;
    throw ValidationError("unknown cost-min mode '" + name + "'");
}

}  // namespace qcopt
