#pragma once

// Task graphs unfolded from a multiscale model: one node per submodel
// instance and iteration, plus initialization and completion nodes.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "mcp/model.hpp"

namespace mcp {

using NodeId = std::string;

enum class Phase { Init, Cycle, Final };

inline std::string_view to_string(Phase p) {
    switch (p) {
    case Phase::Init: return "init";
    case Phase::Cycle: return "cycle";
    case Phase::Final: return "final";
    }
    return "?";
}

struct TaskNode {
    NodeId id;
    std::string submodel;
    int instance = 0;
    int iteration = 0;
    Phase phase = Phase::Cycle;
    std::optional<double> cost_hint;
    int stream = 0;  // independent copy of the workload (interleaved execution)
};

struct TaskEdge {
    NodeId from;
    NodeId to;
    std::uint64_t payload_bytes = 0;
};

class CycleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TaskGraph {
public:
    std::size_t add_node(TaskNode node) {
        if (index_.count(node.id)) throw std::invalid_argument("duplicate task node id '" + node.id + "'");
        auto key = std::make_tuple(node.stream, node.submodel, node.instance, node.iteration, node.phase);
        if (!keys_.insert(key).second)
            throw std::invalid_argument("duplicate (submodel, instance, iteration, phase) for '" + node.id + "'");
        std::size_t i = nodes_.size();
        index_.emplace(node.id, i);
        nodes_.push_back(std::move(node));
        out_.emplace_back();
        in_.emplace_back();
        return i;
    }

    /// Adds u -> v. A repeated edge merges into the existing one, adding payloads.
    void add_edge(const NodeId& from, const NodeId& to, std::uint64_t payload_bytes = 0) {
        add_edge(require(from), require(to), payload_bytes);
    }

    void add_edge(std::size_t u, std::size_t v, std::uint64_t payload_bytes = 0) {
        if (u >= nodes_.size() || v >= nodes_.size()) throw std::out_of_range("edge endpoint out of range");
        for (auto e : out_[u]) {
            if (edge_to_[e] == v) {
                edges_[e].payload_bytes += payload_bytes;
                return;
            }
        }
        std::size_t e = edges_.size();
        edges_.push_back({nodes_[u].id, nodes_[v].id, payload_bytes});
        edge_from_.push_back(u);
        edge_to_.push_back(v);
        out_[u].push_back(e);
        in_[v].push_back(e);
    }

    const std::vector<TaskNode>& nodes() const { return nodes_; }
    const std::vector<TaskEdge>& edges() const { return edges_; }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    std::optional<std::size_t> index_of(const NodeId& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t require(const NodeId& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw std::out_of_range("unknown task node '" + id + "'");
        return it->second;
    }

    /// Node indices ordered by id.
    std::vector<std::size_t> indices_by_id() const {
        std::vector<std::size_t> out;
        out.reserve(index_.size());
        for (const auto& [id, i] : index_) out.push_back(i);
        return out;
    }

    const TaskNode& node(std::size_t i) const { return nodes_.at(i); }
    const TaskNode& node(const NodeId& id) const { return nodes_[require(id)]; }

    std::vector<std::size_t> successors(std::size_t u) const {
        std::vector<std::size_t> out;
        for (auto e : out_[u]) out.push_back(edge_to_[e]);
        return out;
    }

    std::vector<std::size_t> predecessors(std::size_t v) const {
        std::vector<std::size_t> out;
        for (auto e : in_[v]) out.push_back(edge_from_[e]);
        return out;
    }

    std::size_t in_degree(std::size_t v) const { return in_[v].size(); }

private:
    std::vector<TaskNode> nodes_;
    std::vector<TaskEdge> edges_;
    std::vector<std::size_t> edge_from_, edge_to_;
    std::vector<std::vector<std::size_t>> out_, in_;
    std::map<NodeId, std::size_t> index_;
    std::set<std::tuple<int, std::string, int, int, Phase>> keys_;
};

/// `<submodel>[i<instance>]@<iteration>/<phase>`
inline std::string node_label(const TaskNode& n) {
    std::ostringstream os;
    if (n.stream) os << "s" << n.stream << ":";
    os << n.submodel << "[i" << n.instance << "]@" << n.iteration << "/" << to_string(n.phase);
    return os.str();
}

/// Copies `src` into `dst` as workload stream `stream`, prefixing ids with `s<stream>:`.
inline void append_stream(TaskGraph& dst, const TaskGraph& src, int stream) {
    const std::string prefix = "s" + std::to_string(stream) + ":";
    for (auto n : src.nodes()) {
        n.id = prefix + n.id;
        n.stream = stream;
        dst.add_node(std::move(n));
    }
    for (const auto& e : src.edges()) dst.add_edge(prefix + e.from, prefix + e.to, e.payload_bytes);
}

// ---------------------------------------------------------------------------
// Ordering

namespace detail {

inline int phase_rank(Phase p) { return p == Phase::Init ? 0 : p == Phase::Cycle ? 1 : 2; }

/// Kahn's algorithm; ties by (iteration, submodel, instance, phase, id).
/// Returns node indices; fewer than size() when the graph has a cycle.
inline std::vector<std::size_t> kahn_order(const TaskGraph& g) {
    const auto& nodes = g.nodes();
    auto key = [&](std::size_t i) {
        const auto& n = nodes[i];
        return std::tuple<int, const std::string&, int, int, const std::string&>(
            n.iteration, n.submodel, n.instance, phase_rank(n.phase), n.id);
    };
    auto later = [&](std::size_t a, std::size_t b) { return key(a) > key(b); };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
    std::vector<std::size_t> indeg(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        indeg[i] = g.in_degree(i);
        if (indeg[i] == 0) ready.push(i);
    }
    std::vector<std::size_t> order;
    order.reserve(g.size());
    while (!ready.empty()) {
        auto u = ready.top();
        ready.pop();
        order.push_back(u);
        for (auto v : g.successors(u)) {
            if (--indeg[v] == 0) ready.push(v);
        }
    }
    return order;
}

}  // namespace detail

inline bool is_acyclic(const TaskGraph& g) { return detail::kahn_order(g).size() == g.size(); }

inline std::vector<NodeId> topological_order(const TaskGraph& g) {
    auto idx = detail::kahn_order(g);
    if (idx.size() != g.size()) throw CycleError("task graph contains a cycle");
    std::vector<NodeId> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(g.node(i).id);
    return out;
}

struct CriticalPath {
    double length = 0;
    std::vector<NodeId> path;
};

inline CriticalPath critical_path(const TaskGraph& g, const std::map<NodeId, double>& costs) {
    std::vector<double> cost(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto it = costs.find(g.node(i).id);
        if (it == costs.end()) throw std::invalid_argument("missing cost for task '" + g.node(i).id + "'");
        if (!(it->second >= 0)) throw std::invalid_argument("negative cost for task '" + g.node(i).id + "'");
        cost[i] = it->second;
    }
    auto order = detail::kahn_order(g);
    if (order.size() != g.size()) throw CycleError("task graph contains a cycle");

    constexpr auto none = static_cast<std::size_t>(-1);
    std::vector<double> finish(g.size(), 0);
    std::vector<std::size_t> via(g.size(), none);
    for (auto v : order) {
        double best = 0;
        for (auto u : g.predecessors(v)) {
            if (finish[u] > best || (via[v] == none && finish[u] >= best)) {
                best = finish[u];
                via[v] = u;
            }
        }
        finish[v] = best + cost[v];
    }

    CriticalPath cp;
    std::size_t end = none;
    for (auto v : order) {
        if (end == none || finish[v] > finish[end]) end = v;
    }
    if (end == none) return cp;
    cp.length = finish[end];
    for (auto v = end; v != none; v = via[v]) cp.path.push_back(g.node(v).id);
    std::reverse(cp.path.begin(), cp.path.end());
    return cp;
}

inline std::string to_dot(const TaskGraph& g) {
    std::ostringstream os;
    os << "digraph g {\n";
    std::vector<const TaskNode*> nodes;
    for (const auto& n : g.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (auto* n : nodes) os << "  \"" << n->id << "\" [label=\"" << node_label(*n) << "\"];\n";
    std::vector<const TaskEdge*> edges;
    for (const auto& e : g.edges()) edges.push_back(&e);
    std::sort(edges.begin(), edges.end(),
              [](auto* a, auto* b) { return std::tie(a->from, a->to) < std::tie(b->from, b->to); });
    for (auto* e : edges) {
        os << "  \"" << e->from << "\" -> \"" << e->to << "\"";
        if (e->payload_bytes) os << " [label=\"" << e->payload_bytes << " B\"]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Unfolding

/// Per-cycle couplings split into same-iteration and next-iteration edges.
/// A depth-first search from the entry submodels marks back edges as feedback;
/// submodels it cannot reach have no valid starting point.
struct CycleOrdering {
    std::vector<bool> feedback;             // parallel to model couplings
    std::vector<std::string> unreachable;   // declaration order
};

inline CycleOrdering cycle_ordering(const MultiscaleModel& m) {
    const std::size_t n = m.submodels.size();
    CycleOrdering out;
    out.feedback.assign(m.couplings.size(), false);

    std::vector<std::vector<std::size_t>> adj(n);  // coupling indices
    for (std::size_t c = 0; c < m.couplings.size(); ++c) {
        const auto& cp = m.couplings[c];
        if (cp.kind != CouplingKind::PerCycle) continue;
        int f = m.index_of(cp.from), t = m.index_of(cp.to);
        if (f < 0 || t < 0) continue;
        adj[static_cast<std::size_t>(f)].push_back(c);
    }

    enum Color { White, Gray, Black };
    std::vector<Color> color(n, White);
    struct Frame {
        std::size_t node;
        std::size_t next;
    };
    for (const auto& entry : entry_submodels(m)) {
        auto root = static_cast<std::size_t>(m.index_of(entry));
        if (color[root] != White) continue;
        std::vector<Frame> stack{{root, 0}};
        color[root] = Gray;
        while (!stack.empty()) {
            auto& fr = stack.back();
            if (fr.next == adj[fr.node].size()) {
                color[fr.node] = Black;
                stack.pop_back();
                continue;
            }
            auto c = adj[fr.node][fr.next++];
            auto t = static_cast<std::size_t>(m.index_of(m.couplings[c].to));
            if (color[t] == Gray) {
                out.feedback[c] = true;
            } else if (color[t] == White) {
                color[t] = Gray;
                stack.push_back({t, 0});
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (color[i] == White) out.unreachable.push_back(m.submodels[i].id);
    }
    return out;
}

struct DeadlockReport {
    bool deadlock = false;
    std::vector<std::string> submodels;  // members of the offending cycle
    std::string description;

    explicit operator bool() const { return deadlock; }
};

class DeadlockError : public std::runtime_error {
public:
    explicit DeadlockError(DeadlockReport r) : std::runtime_error(r.description), report_(std::move(r)) {}
    const DeadlockReport& report() const { return report_; }

private:
    DeadlockReport report_;
};

namespace detail {

inline std::string id_init(const std::string& s) { return s + ".init"; }
inline std::string id_final(const std::string& s) { return s + ".final"; }
inline std::string id_cycle(const std::string& s, int i, int k) {
    return s + ".i" + std::to_string(i) + ".k" + std::to_string(k);
}

inline DeadlockReport make_deadlock(std::vector<std::string> members, const std::string& why) {
    DeadlockReport r;
    r.deadlock = true;
    r.submodels = std::move(members);
    std::string list;
    for (const auto& s : r.submodels) list += (list.empty() ? "" : ", ") + s;
    r.description = "deadlock: " + why + ": " + list;
    return r;
}

/// Builds the unfolded graph without deadlock checks. Unknown endpoints are skipped.
inline TaskGraph build_unfolded(const MultiscaleModel& m, int cycles, const std::map<std::string, int>& counts,
                                const CycleOrdering& ord) {
    TaskGraph g;
    std::set<std::string> init_targets, has_pred, final_sources;
    for (const auto& c : m.couplings) {
        if (c.kind == CouplingKind::Init) init_targets.insert(c.to);
        if (c.kind == CouplingKind::PerCycle) has_pred.insert(c.to);
        if (c.kind == CouplingKind::Final) final_sources.insert(c.from);
    }
    auto k_of = [&](const Submodel& s) { return counts.at(s.id); };
    auto has_init = [&](const std::string& s) { return init_targets.count(s) || !has_pred.count(s); };

    for (const auto& s : m.submodels) {
        if (has_init(s.id)) g.add_node({id_init(s.id), s.id, 0, 0, Phase::Init, std::nullopt});
    }
    for (int k = 0; k < cycles; ++k) {
        for (const auto& s : m.submodels) {
            for (int i = 0; i < k_of(s); ++i) g.add_node({id_cycle(s.id, i, k), s.id, i, k, Phase::Cycle, std::nullopt});
        }
    }
    for (const auto& s : m.submodels) {
        if (final_sources.count(s.id)) g.add_node({id_final(s.id), s.id, 0, cycles - 1, Phase::Final, std::nullopt});
    }

    for (const auto& s : m.submodels) {
        if (!has_init(s.id)) continue;
        for (int i = 0; i < k_of(s); ++i) g.add_edge(id_init(s.id), id_cycle(s.id, i, 0));
    }

    for (std::size_t ci = 0; ci < m.couplings.size(); ++ci) {
        const auto& c = m.couplings[ci];
        const auto* from = m.find(c.from);
        const auto* to = m.find(c.to);
        if (!from || !to) continue;
        switch (c.kind) {
        case CouplingKind::Init:
            if (has_init(c.from)) g.add_edge(id_init(c.from), id_init(c.to), c.payload_bytes);
            break;
        case CouplingKind::PerCycle: {
            const int shift = ord.feedback[ci] ? 1 : 0;
            for (int k = 0; k + shift < cycles; ++k)
                for (int i = 0; i < k_of(*from); ++i)
                    for (int j = 0; j < k_of(*to); ++j)
                        g.add_edge(id_cycle(c.from, i, k), id_cycle(c.to, j, k + shift), c.payload_bytes);
            break;
        }
        case CouplingKind::Final:
            for (int i = 0; i < k_of(*from); ++i) g.add_edge(id_cycle(c.from, i, cycles - 1), id_final(c.from));
            for (int j = 0; j < k_of(*to); ++j) g.add_edge(id_final(c.from), id_cycle(c.to, j, 0), c.payload_bytes);
            break;
        }
    }
    return g;
}

/// Whether cycle node `target` is reachable from `source` using only cycle
/// nodes of iterations [lo, hi]. Edges never decrease the iteration index.
inline bool reachable_within(const TaskGraph& g, std::size_t source, std::size_t target, int lo, int hi) {
    std::vector<std::size_t> stack{source};
    std::set<std::size_t> seen{source};
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        if (u == target) return true;
        for (auto v : g.successors(u)) {
            const auto& n = g.node(v);
            if (n.phase != Phase::Cycle || n.iteration < lo || n.iteration > hi) continue;
            if (seen.insert(v).second) stack.push_back(v);
        }
    }
    return false;
}

/// Orders consecutive iterations of the same instance unless a dependency
/// path already does.
inline void add_continuation_edges(TaskGraph& g, const MultiscaleModel& m, int cycles,
                                   const std::map<std::string, int>& counts) {
    for (int k = 1; k < cycles; ++k) {
        for (const auto& s : m.submodels) {
            for (int i = 0; i < counts.at(s.id); ++i) {
                auto prev = g.require(id_cycle(s.id, i, k - 1));
                auto next = g.require(id_cycle(s.id, i, k));
                if (!reachable_within(g, prev, next, k - 1, k)) g.add_edge(prev, next);
            }
        }
    }
}

inline std::vector<std::string> cycle_members(const TaskGraph& g) {
    // Nodes left after repeatedly peeling sources and sinks lie on or between cycles.
    std::vector<std::size_t> indeg(g.size()), outdeg(g.size());
    std::vector<bool> removed(g.size(), false);
    for (std::size_t i = 0; i < g.size(); ++i) {
        indeg[i] = g.in_degree(i);
        outdeg[i] = g.successors(i).size();
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (removed[i] || (indeg[i] && outdeg[i])) continue;
            removed[i] = true;
            changed = true;
            for (auto v : g.successors(i)) --indeg[v];
            for (auto u : g.predecessors(i)) --outdeg[u];
        }
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!removed[i]) names.insert(g.node(i).submodel);
    }
    return {names.begin(), names.end()};
}

}  // namespace detail

/// Reports a deadlock when some per-cycle dependency cycle has no entry point
/// (no init coupling into it and no feedback edge can be designated), or when
/// init/final couplings close a cycle that iteration shifting cannot break.
inline DeadlockReport detect_deadlock(const MultiscaleModel& m) {
    auto ord = cycle_ordering(m);
    if (!ord.unreachable.empty()) {
        // Keep only unreachable submodels that sit on a per-cycle cycle among themselves.
        std::set<std::string> un(ord.unreachable.begin(), ord.unreachable.end());
        TaskGraph sub;
        for (const auto& s : ord.unreachable) sub.add_node({s, s, 0, 0, Phase::Cycle, std::nullopt});
        for (const auto& c : m.couplings) {
            if (c.kind == CouplingKind::PerCycle && un.count(c.from) && un.count(c.to)) sub.add_edge(c.from, c.to);
        }
        auto members = detail::cycle_members(sub);
        std::vector<std::string> ordered;
        for (const auto& s : m.submodels) {
            if (std::find(members.begin(), members.end(), s.id) != members.end()) ordered.push_back(s.id);
        }
        return detail::make_deadlock(ordered, "per_cycle dependency cycle without an entry point");
    }

    std::map<std::string, int> ones;
    for (const auto& s : m.submodels) ones[s.id] = 1;
    auto g = detail::build_unfolded(m, 2, ones, ord);
    detail::add_continuation_edges(g, m, 2, ones);
    if (!is_acyclic(g)) {
        auto members = detail::cycle_members(g);
        std::vector<std::string> ordered;
        for (const auto& s : m.submodels) {
            if (std::find(members.begin(), members.end(), s.id) != members.end()) ordered.push_back(s.id);
        }
        return detail::make_deadlock(ordered, "init/final couplings form a cycle");
    }
    return {};
}

/// Materializes `cycles` iterations of the model as a task graph.
/// Dynamic-multiplicity submodels take their instance count from `instance_counts`.
inline TaskGraph unfold(const MultiscaleModel& m, int cycles, const std::map<std::string, int>& instance_counts = {}) {
    if (cycles < 1) throw std::invalid_argument("cycles must be >= 1");
    auto diags = validate_model(m);
    if (!diags.empty()) throw std::invalid_argument("invalid model: " + diags.front().message);
    if (auto dl = detect_deadlock(m)) throw DeadlockError(dl);

    std::map<std::string, int> counts;
    for (const auto& s : m.submodels) {
        if (s.multiplicity.is_dynamic()) {
            auto it = instance_counts.find(s.id);
            if (it == instance_counts.end())
                throw std::invalid_argument("missing instance count for dynamic submodel '" + s.id + "'");
            if (it->second < 1)
                throw std::invalid_argument("instance count for '" + s.id + "' must be >= 1");
            counts[s.id] = it->second;
        } else {
            counts[s.id] = s.multiplicity.count();
        }
    }
    auto ord = cycle_ordering(m);
    auto g = detail::build_unfolded(m, cycles, counts, ord);
    detail::add_continuation_edges(g, m, cycles, counts);
    return g;
}

}  // namespace mcp
