#pragma once

// Multiscale computing patterns: Extreme Scaling (ES), Heterogeneous
// Multiscale Computing (HMC) and Replica Computing (RC). Classification of a
// model, embedding of its task graph, and the generic template graphs.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcp/model.hpp"
#include "mcp/taskgraph.hpp"

namespace mcp {

enum class PatternKind { ES, HMC, RC_static, RC_dynamic, RC_exchange };

inline std::string_view to_string(PatternKind k) {
    switch (k) {
    case PatternKind::ES: return "ES";
    case PatternKind::HMC: return "HMC";
    case PatternKind::RC_static: return "RC-static";
    case PatternKind::RC_dynamic: return "RC-dynamic";
    case PatternKind::RC_exchange: return "RC-exchange";
    }
    return "?";
}

inline std::optional<PatternKind> pattern_kind_from_string(std::string_view s) {
    for (auto k : {PatternKind::ES, PatternKind::HMC, PatternKind::RC_static, PatternKind::RC_dynamic,
                   PatternKind::RC_exchange}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

inline bool is_replica_computing(PatternKind k) {
    return k == PatternKind::RC_static || k == PatternKind::RC_dynamic || k == PatternKind::RC_exchange;
}

/// Template roles. ES: A, B_s, B_p. HMC: macro, database, micro. RC: replica (A_1^+), master (A_2).
enum class Role { A, B_s, B_p, Macro, Database, Micro, Replica, Master };

inline std::string_view to_string(Role r) {
    switch (r) {
    case Role::A: return "A";
    case Role::B_s: return "B_s";
    case Role::B_p: return "B_p";
    case Role::Macro: return "macro";
    case Role::Database: return "database";
    case Role::Micro: return "micro";
    case Role::Replica: return "replica";
    case Role::Master: return "master";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Structural signatures

struct HmcStructure {
    std::string macro;
    std::optional<std::string> database;
    std::string micro;
};

struct RcStructure {
    std::string replica;
    std::string master;
    PatternKind variant = PatternKind::RC_static;
};

namespace detail {

inline std::vector<std::string> per_cycle_neighbors(const MultiscaleModel& m, const std::string& id) {
    std::vector<std::string> out;
    for (const auto& s : m.submodels) {
        if (s.id == id) continue;
        for (const auto& c : m.couplings) {
            if (c.kind != CouplingKind::PerCycle) continue;
            if ((c.from == id && c.to == s.id) || (c.to == id && c.from == s.id)) {
                out.push_back(s.id);
                break;
            }
        }
    }
    return out;
}

inline bool has_role(const MultiscaleModel& m, const std::string& id, RoleHint r) {
    const auto* s = m.find(id);
    return s && s->role_hint == r;
}

}  // namespace detail

/// One dynamic-multiplicity submodel exchanging per cycle with a single macro
/// submodel, optionally through a database submodel.
inline std::optional<HmcStructure> hmc_structure(const MultiscaleModel& m) {
    std::vector<std::string> dynamic;
    for (const auto& s : m.submodels) {
        if (s.multiplicity.is_dynamic()) dynamic.push_back(s.id);
    }
    if (dynamic.size() != 1) return std::nullopt;
    const auto micro = dynamic.front();
    const auto near = detail::per_cycle_neighbors(m, micro);
    if (near.empty()) return std::nullopt;

    std::optional<std::string> macro;
    for (const auto& n : near) {
        if (!macro && detail::has_role(m, n, RoleHint::Macro)) macro = n;
    }
    if (!macro) {
        for (const auto& n : near) {
            for (const auto& nn : detail::per_cycle_neighbors(m, n)) {
                if (!macro && nn != micro && detail::has_role(m, nn, RoleHint::Macro)) macro = nn;
            }
        }
    }
    if (!macro && near.size() == 1) {
        // micro <-> X <-> Y: X is the database when it has exactly one other partner
        std::vector<std::string> others;
        for (const auto& nn : detail::per_cycle_neighbors(m, near.front())) {
            if (nn != micro) others.push_back(nn);
        }
        macro = others.size() == 1 ? others.front() : near.front();
    }
    if (!macro) return std::nullopt;

    HmcStructure out{*macro, std::nullopt, micro};
    for (const auto& n : near) {
        if (n == *macro) continue;
        auto nn = detail::per_cycle_neighbors(m, n);
        if (std::find(nn.begin(), nn.end(), *macro) == nn.end()) return std::nullopt;  // a second partner
        if (out.database) return std::nullopt;
        out.database = n;
    }
    return out;
}

/// A fixed-multiplicity (k >= 2) submodel feeding a single-instance master
/// that does not drive it per cycle. Exchange when replicas also trade data
/// per cycle with anything other than the master; dynamic when the master
/// couples back into the replicas.
inline std::optional<RcStructure> rc_structure(const MultiscaleModel& m) {
    std::vector<const Submodel*> candidates;
    for (const auto& s : m.submodels) {
        if (!s.multiplicity.is_dynamic() && s.multiplicity.count() >= 2) candidates.push_back(&s);
    }
    std::stable_partition(candidates.begin(), candidates.end(),
                          [](const Submodel* s) { return s->role_hint == RoleHint::Replica; });
    for (const auto* r : candidates) {
        std::vector<std::string> masters;
        for (const auto& c : m.couplings) {
            if (c.from != r->id) continue;
            const auto* t = m.find(c.to);
            if (!t || t->multiplicity.is_dynamic() || t->multiplicity.count() != 1) continue;
            // a master driving the instances every cycle makes them auxiliaries, not replicas
            bool drives = std::any_of(m.couplings.begin(), m.couplings.end(), [&](const Coupling& b) {
                return b.kind == CouplingKind::PerCycle && b.from == t->id && b.to == r->id;
            });
            if (drives && r->role_hint != RoleHint::Replica) continue;
            if (std::find(masters.begin(), masters.end(), t->id) == masters.end()) masters.push_back(t->id);
        }
        if (masters.empty()) continue;
        std::stable_partition(masters.begin(), masters.end(),
                              [&](const std::string& id) { return detail::has_role(m, id, RoleHint::Master); });
        RcStructure out{r->id, masters.front(), PatternKind::RC_static};
        bool exchange = false, dynamic = false;
        for (const auto& c : m.couplings) {
            if (c.kind == CouplingKind::PerCycle && (c.from == r->id || c.to == r->id)) {
                const auto& other = c.from == r->id ? c.to : c.from;
                if (other != out.master) exchange = true;
            }
            if (c.from == out.master && c.to == r->id) dynamic = true;
        }
        if (exchange) {
            out.variant = PatternKind::RC_exchange;
        } else if (dynamic) {
            out.variant = PatternKind::RC_dynamic;
        }
        return out;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Classification

struct Classification {
    enum class Status { Classified, Unclassified, Ambiguous };

    Status status = Status::Unclassified;
    std::optional<PatternKind> kind;
    std::string primary;     // ES: the dominating submodel
    double max_share = 0;    // ES: its share of the aggregate cost
    std::string detail;

    bool ok() const { return status == Status::Classified; }
};

namespace detail {

/// Cost shares per submodel, weighted by fixed multiplicity.
inline std::map<std::string, double> cost_shares(const MultiscaleModel& m, const std::map<std::string, double>& costs) {
    double total = 0;
    std::map<std::string, double> agg;
    for (const auto& s : m.submodels) {
        auto it = costs.find(s.id);
        if (it == costs.end()) throw std::invalid_argument("missing cost for submodel '" + s.id + "'");
        if (!(it->second > 0)) throw std::invalid_argument("cost for submodel '" + s.id + "' must be positive");
        double k = s.multiplicity.is_dynamic() ? 1.0 : s.multiplicity.count();
        agg[s.id] = it->second * k;
        total += agg[s.id];
    }
    for (auto& [id, v] : agg) v /= total;
    return agg;
}

inline void fill_primary(Classification& c, const MultiscaleModel& m, const std::map<std::string, double>& costs) {
    auto shares = cost_shares(m, costs);
    for (const auto& s : m.submodels) {
        if (shares.at(s.id) > c.max_share) {
            c.max_share = shares.at(s.id);
            c.primary = s.id;
        }
    }
}

}  // namespace detail

/// Precedence: explicit pattern hint, then HMC, then RC, then the ES cost
/// dominance test (max aggregate cost share >= theta_es).
inline Classification classify(const MultiscaleModel& m, const std::map<std::string, double>& costs,
                               double theta_es = 0.9) {
    if (!(theta_es > 0 && theta_es <= 1)) throw std::invalid_argument("theta_es must be in (0, 1]");
    Classification out;

    if (m.pattern_hint && *m.pattern_hint != PatternHint::Auto) {
        out.status = Classification::Status::Classified;
        switch (*m.pattern_hint) {
        case PatternHint::ES: out.kind = PatternKind::ES; break;
        case PatternHint::HMC: out.kind = PatternKind::HMC; break;
        case PatternHint::RCStatic: out.kind = PatternKind::RC_static; break;
        case PatternHint::RCDynamic: out.kind = PatternKind::RC_dynamic; break;
        case PatternHint::RCExchange: out.kind = PatternKind::RC_exchange; break;
        case PatternHint::Auto: break;
        }
        out.detail = "pattern hint";
        if (out.kind == PatternKind::ES) detail::fill_primary(out, m, costs);
        return out;
    }

    auto hmc = hmc_structure(m);
    auto rc = rc_structure(m);
    if (hmc && rc) {
        out.status = Classification::Status::Ambiguous;
        out.detail = "both HMC structure (micro '" + hmc->micro + "') and RC structure (replica '" + rc->replica +
                     "') present";
        return out;
    }
    if (hmc) {
        out.status = Classification::Status::Classified;
        out.kind = PatternKind::HMC;
        out.detail = "dynamic micro '" + hmc->micro + "' coupled to macro '" + hmc->macro + "'";
        return out;
    }
    if (rc) {
        out.status = Classification::Status::Classified;
        out.kind = rc->variant;
        out.detail = "replica '" + rc->replica + "' feeding master '" + rc->master + "'";
        return out;
    }

    detail::fill_primary(out, m, costs);
    if (out.max_share >= theta_es) {
        out.status = Classification::Status::Classified;
        out.kind = PatternKind::ES;
        out.detail = "primary '" + out.primary + "' dominates";
    } else {
        out.status = Classification::Status::Unclassified;
        out.detail = "no submodel reaches the ES dominance threshold";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Embedding

struct PatternEmbedding {
    PatternKind kind = PatternKind::ES;
    std::map<std::string, Role> role_of;
    int unit_count = 0;
    std::vector<NodeId> residual;

    std::vector<std::string> submodels_with(Role r) const {
        std::vector<std::string> out;
        for (const auto& [id, role] : role_of) {
            if (role == r) out.push_back(id);
        }
        return out;
    }
};

namespace detail {

inline std::vector<NodeId> residual_nodes(const TaskGraph& g) {
    std::vector<NodeId> out;
    for (const auto& n : g.nodes()) {
        if (n.phase != Phase::Cycle) out.push_back(n.id);
    }
    return out;
}

/// Cycle nodes of iteration k reachable from `start` along edges within that
/// iteration, in the direction given.
inline std::set<std::size_t> same_iteration_closure(const TaskGraph& g, std::size_t start, bool forward) {
    const int k = g.node(start).iteration;
    std::set<std::size_t> seen{start};
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto v : forward ? g.successors(u) : g.predecessors(u)) {
            const auto& n = g.node(v);
            if (n.phase != Phase::Cycle || n.iteration != k) continue;
            if (seen.insert(v).second) stack.push_back(v);
        }
    }
    return seen;
}

}  // namespace detail

/// Maps an unfolded graph onto the ES template with `primary` as role A.
/// Submodels ordered with A inside an iteration are serial auxiliaries (B_s);
/// those incomparable with A in every iteration are parallel auxiliaries (B_p).
inline PatternEmbedding embed_es(const TaskGraph& g, const MultiscaleModel& m, const std::string& primary) {
    if (!m.find(primary)) throw std::invalid_argument("unknown primary submodel '" + primary + "'");

    std::map<int, std::vector<std::size_t>> a_nodes;
    std::set<std::string> cycled;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& n = g.node(i);
        if (n.phase != Phase::Cycle) continue;
        cycled.insert(n.submodel);
        if (n.submodel == primary) a_nodes[n.iteration].push_back(i);
    }
    if (a_nodes.empty()) throw std::invalid_argument("primary '" + primary + "' participates in no repeating unit");

    std::map<int, std::set<std::size_t>> related;  // per iteration: nodes comparable with A
    for (const auto& [k, nodes] : a_nodes) {
        for (auto a : nodes) {
            for (bool fwd : {true, false}) {
                auto c = detail::same_iteration_closure(g, a, fwd);
                related[k].insert(c.begin(), c.end());
            }
        }
    }

    PatternEmbedding e;
    e.kind = PatternKind::ES;
    e.unit_count = static_cast<int>(a_nodes.size());
    e.residual = detail::residual_nodes(g);
    for (const auto& s : m.submodels) {
        if (!cycled.count(s.id)) continue;
        if (s.id == primary) {
            e.role_of[s.id] = Role::A;
            continue;
        }
        bool serial = false;
        for (std::size_t i = 0; i < g.size() && !serial; ++i) {
            const auto& n = g.node(i);
            if (n.phase != Phase::Cycle || n.submodel != s.id) continue;
            auto it = related.find(n.iteration);
            serial = it != related.end() && it->second.count(i);
        }
        e.role_of[s.id] = serial ? Role::B_s : Role::B_p;
    }
    return e;
}

inline PatternEmbedding embed_hmc(const TaskGraph& g, const MultiscaleModel& m) {
    auto st = hmc_structure(m);
    if (!st) throw std::invalid_argument("model has no HMC structure");
    PatternEmbedding e;
    e.kind = PatternKind::HMC;
    e.residual = detail::residual_nodes(g);
    e.role_of[st->macro] = Role::Macro;
    e.role_of[st->micro] = Role::Micro;
    if (st->database) e.role_of[*st->database] = Role::Database;
    std::set<int> iters;
    for (const auto& n : g.nodes()) {
        if (n.phase == Phase::Cycle && n.submodel == st->macro) iters.insert(n.iteration);
    }
    e.unit_count = static_cast<int>(iters.size());
    // remaining submodels travel with the macro model
    for (const auto& s : m.submodels) {
        if (!e.role_of.count(s.id)) e.role_of[s.id] = Role::Macro;
    }
    return e;
}

inline PatternEmbedding embed_rc(const TaskGraph& g, const MultiscaleModel& m, PatternKind kind) {
    auto st = rc_structure(m);
    if (!st) throw std::invalid_argument("model has no RC structure");
    PatternEmbedding e;
    e.kind = kind;
    e.residual = detail::residual_nodes(g);
    for (const auto& s : m.submodels) e.role_of[s.id] = s.id == st->replica ? Role::Replica : Role::Master;
    std::set<int> iters;
    for (const auto& n : g.nodes()) {
        if (n.phase == Phase::Cycle && n.submodel == st->replica) iters.insert(n.iteration);
    }
    e.unit_count = static_cast<int>(iters.size());
    return e;
}

// ---------------------------------------------------------------------------
// Generic templates

struct TemplateParams {
    bool serial_aux = true;    // ES: B_s present
    bool parallel_aux = true;  // ES: B_p present
    int units = 1;             // ES/HMC: repeating units materialized
    int micro_slots = 1;       // HMC
    int replicas = 1;          // RC: n
    int rounds = 1;            // RC-dynamic: feedback rounds
    int exchanges = 1;         // RC-exchange: exchange steps between replica segments
};

/// Template graphs use the role names as submodel ids.
/// HMC: the database appears twice per unit, instance 0 dispatching requests
/// and instance 1 collecting results for the next macro step.
inline TaskGraph pattern_template(PatternKind kind, const TemplateParams& p) {
    if (p.units < 1) throw std::invalid_argument("template needs at least one unit");
    TaskGraph g;
    auto add = [&](const std::string& role, int inst, int it) {
        auto id = detail::id_cycle(role, inst, it);
        g.add_node({id, role, inst, it, Phase::Cycle, std::nullopt});
        return id;
    };

    switch (kind) {
    case PatternKind::ES: {
        std::vector<std::string> prev_tail;  // nodes feeding the next unit
        for (int u = 0; u < p.units; ++u) {
            auto a = add("A", 0, u);
            std::optional<std::string> bp, bs;
            if (p.parallel_aux) bp = add("B_p", 0, u);
            if (p.serial_aux) bs = add("B_s", 0, u);
            for (const auto& t : prev_tail) {
                g.add_edge(t, a);
                if (bp) g.add_edge(t, *bp);
            }
            prev_tail.clear();
            if (bs) {
                g.add_edge(a, *bs);
                if (bp) g.add_edge(*bp, *bs);
                prev_tail.push_back(*bs);
            } else {
                prev_tail.push_back(a);
                if (bp) prev_tail.push_back(*bp);
            }
        }
        break;
    }
    case PatternKind::HMC: {
        if (p.micro_slots < 1) throw std::invalid_argument("HMC template needs micro_slots >= 1");
        std::optional<std::string> prev;
        for (int u = 0; u < p.units; ++u) {
            auto macro = add("macro", 0, u);
            if (prev) g.add_edge(*prev, macro);
            auto dispatch = add("database", 0, u);
            auto collect = add("database", 1, u);
            g.add_edge(macro, dispatch);
            for (int i = 0; i < p.micro_slots; ++i) {
                auto mu = add("micro", i, u);
                g.add_edge(dispatch, mu);
                g.add_edge(mu, collect);
            }
            prev = collect;
        }
        break;
    }
    case PatternKind::RC_static:
    case PatternKind::RC_dynamic:
    case PatternKind::RC_exchange: {
        if (p.replicas < 1) throw std::invalid_argument("RC template needs replicas >= 1");
        if (p.rounds < 1) throw std::invalid_argument("RC template needs rounds >= 1");
        if (kind == PatternKind::RC_static && p.rounds != 1)
            throw std::invalid_argument("static RC has exactly one round");
        if (kind == PatternKind::RC_exchange && p.exchanges < 1)
            throw std::invalid_argument("RC exchange template needs exchanges >= 1");
        const int rounds = kind == PatternKind::RC_dynamic ? p.rounds : 1;
        const int segments = kind == PatternKind::RC_exchange ? p.exchanges + 1 : 1;
        std::optional<std::string> prev_master;
        for (int r = 0; r < rounds; ++r) {
            std::vector<std::string> tails;
            for (int i = 0; i < p.replicas; ++i) tails.push_back(add("replica", i, r * segments));
            if (prev_master) {
                for (const auto& t : tails) g.add_edge(*prev_master, t);
            }
            for (int s = 1; s < segments; ++s) {
                auto ex = add("exchange", 0, r * segments + s - 1);
                for (const auto& t : tails) g.add_edge(t, ex);
                for (int i = 0; i < p.replicas; ++i) {
                    tails[static_cast<std::size_t>(i)] = add("replica", i, r * segments + s);
                    g.add_edge(ex, tails[static_cast<std::size_t>(i)]);
                }
            }
            auto master = add("master", 0, r);
            for (const auto& t : tails) g.add_edge(t, master);
            prev_master = master;
        }
        break;
    }
    }
    return g;
}

}  // namespace mcp
