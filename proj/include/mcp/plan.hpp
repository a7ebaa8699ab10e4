#pragma once

// Execution planning: core sets, frequencies, start order and recovery
// policies for a task graph embedded in one of the pattern templates.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcp/machine.hpp"
#include "mcp/patterns.hpp"
#include "mcp/perf.hpp"
#include "mcp/taskgraph.hpp"

namespace mcp {

enum class RecoveryPolicy { RestartTask, SkipIfQualityOk, MustRestart };

inline std::string_view to_string(RecoveryPolicy p) {
    switch (p) {
    case RecoveryPolicy::RestartTask: return "restart_task";
    case RecoveryPolicy::SkipIfQualityOk: return "skip_if_quality_ok";
    case RecoveryPolicy::MustRestart: return "must_restart";
    }
    return "?";
}

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Assignment {
    std::vector<int> cores;  // physical core ids; empty for zero-duration residual tasks
    double frequency = 1;
    Role role = Role::A;
    std::string submodel;
    int instance = 0;
};

struct PlanOptions {
    ModeThresholds thresholds;
    double slack_tol = 0;
    bool optimize_energy = true;
    std::optional<ExecMode> force_mode;
    int cores = 0;  // 0: the whole machine

    // HMC
    bool precompute = false;
    int precompute_slots = 1;
    int expected_micro = -1;  // -1: micro instances present in the graph

    // RC
    int replica_cores = 1;
    int master_cores = 1;
    double quality = 0.9;

    std::optional<double> energy_budget_j;
};

struct ExecutionPlan {
    PatternKind pattern = PatternKind::ES;
    ExecMode mode = ExecMode::Sequential;
    int total_cores = 0;
    std::map<NodeId, Assignment> assignments;
    std::vector<NodeId> order;
    std::map<Role, RecoveryPolicy> recovery;
    std::map<std::string, Role> role_of;
    std::vector<NodeId> residual;

    // ES
    std::optional<EsAllocation> split;
    std::optional<FrequencyAssignment> frequencies;
    std::optional<EsEfficiency> efficiency;
    double predicted_period = 0;  // steady-state time per job (ES) or per cycle (RC)

    // RC
    int n_replicas = 0;
    int replica_slots = 0;
    int waves = 0;
    double quality = 0.9;

    // HMC
    int macro_cores = 0;
    int micro_slots = 0;
    int precompute_slots = 0;

    std::optional<double> energy_budget_j;

    RecoveryPolicy policy_for(Role r) const {
        auto it = recovery.find(r);
        return it == recovery.end() ? RecoveryPolicy::RestartTask : it->second;
    }
};

namespace detail {

inline std::vector<int> core_range(const std::vector<int>& physical, int first, int count) {
    std::vector<int> out;
    for (int i = first; i < first + count; ++i) out.push_back(physical.at(static_cast<std::size_t>(i)));
    std::sort(out.begin(), out.end());
    return out;
}

inline const PerfModel& perf_for(const std::map<std::string, PerfModel>& perf, const std::string& submodel) {
    auto it = perf.find(submodel);
    if (it == perf.end()) throw std::invalid_argument("no performance model for submodel '" + submodel + "'");
    return it->second;
}

/// Instances of `submodel` per iteration in the first stream of the graph.
inline int instances_in(const TaskGraph& g, const std::string& submodel) {
    std::set<int> inst;
    for (const auto& n : g.nodes()) {
        if (n.phase == Phase::Cycle && n.submodel == submodel && n.stream == 0) inst.insert(n.instance);
    }
    return static_cast<int>(inst.size());
}

inline Role role_for(const PatternEmbedding& e, const std::string& submodel, Role fallback) {
    auto it = e.role_of.find(submodel);
    return it == e.role_of.end() ? fallback : it->second;
}

}  // namespace detail

/// ES time models for planning: the primary submodel and all auxiliaries
/// run back to back on shared processors.
struct EsModels {
    PerfModel primary;
    CompositeTime auxiliary;
};

inline EsModels es_models(const PatternEmbedding& e, const TaskGraph& g, const std::map<std::string, PerfModel>& perf) {
    auto a = e.submodels_with(Role::A);
    if (a.size() != 1) throw std::invalid_argument("ES embedding needs exactly one primary submodel");
    EsModels m{detail::perf_for(perf, a.front()), {}};
    for (const auto& [id, role] : e.role_of) {
        if (role != Role::B_s && role != Role::B_p) continue;
        const auto k = std::max(1, detail::instances_in(g, id));
        for (int i = 0; i < k; ++i) m.auxiliary.add(detail::perf_for(perf, id));
    }
    return m;
}

inline ExecutionPlan plan(const PatternEmbedding& embedding, const TaskGraph& g,
                          const std::map<std::string, PerfModel>& perf, const MachineModel& machine,
                          const PlanOptions& options = {}) {
    machine.validate();
    const int procs = options.cores > 0 ? options.cores : machine.total_cores();
    if (procs > machine.total_cores())
        throw PlanError("infeasible: plan asks for " + std::to_string(procs) + " cores, machine has " +
                        std::to_string(machine.total_cores()));
    const auto physical = machine.cores_by_reliability();

    ExecutionPlan p;
    p.pattern = embedding.kind;
    p.total_cores = procs;
    p.role_of = embedding.role_of;
    p.order = topological_order(g);
    p.energy_budget_j = options.energy_budget_j;
    for (const auto& n : g.nodes()) {
        if (n.phase != Phase::Cycle) p.residual.push_back(n.id);
    }

    auto assign = [&](const TaskNode& n, std::vector<int> cores, double f, Role r) {
        if (n.phase != Phase::Cycle) cores.clear();
        p.assignments[n.id] = Assignment{std::move(cores), n.phase == Phase::Cycle ? f : 1.0, r, n.submodel, n.instance};
    };

    if (embedding.kind == PatternKind::ES) {
        const auto models = es_models(embedding, g, perf);
        p.efficiency = es_efficiency(models.primary, models.auxiliary, procs);
        auto choice = choose_mode(models.primary, models.auxiliary, procs, options.thresholds);
        p.mode = options.force_mode.value_or(choice.mode);
        if (p.mode == ExecMode::Interleaved) {
            if (procs < 2) throw PlanError("infeasible: interleaved execution needs at least 2 cores");
            p.split = choice.split ? *choice.split : optimal_split(models.primary, models.auxiliary, procs);
            p.predicted_period = p.split->period;
            p.frequencies = options.optimize_energy
                                ? energy_optimize_interleave(*p.split, machine.energy, options.slack_tol)
                                : FrequencyAssignment{1, 1, 0, p.split->period};
        } else {
            p.predicted_period = choice.sequential_per_job;
        }
        p.recovery = {{Role::A, RecoveryPolicy::RestartTask},
                      {Role::B_s, RecoveryPolicy::RestartTask},
                      {Role::B_p, RecoveryPolicy::RestartTask}};
        for (const auto& n : g.nodes()) {
            const Role r = detail::role_for(embedding, n.submodel, Role::B_s);
            if (p.mode == ExecMode::Sequential) {
                assign(n, detail::core_range(physical, 0, procs), 1.0, r);
            } else if (r == Role::A) {
                assign(n, detail::core_range(physical, 0, p.split->p1), p.frequencies->f_pr, r);
            } else {
                assign(n, detail::core_range(physical, p.split->p1, p.split->p2), p.frequencies->f_aux, r);
            }
        }
        return p;
    }

    if (embedding.kind == PatternKind::HMC) {
        p.mode = ExecMode::Sequential;
        const bool has_db = !embedding.submodels_with(Role::Database).empty();
        const int db_cores = has_db ? 1 : 0;
        int free = procs - db_cores - 1;
        if (free < 0) throw PlanError("infeasible: HMC needs a macro core" + std::string(has_db ? " and a database core" : ""));
        int expected = options.expected_micro;
        if (expected < 0) {
            expected = 0;
            for (const auto& id : embedding.submodels_with(Role::Micro))
                expected = std::max(expected, detail::instances_in(g, id));
        }
        p.precompute_slots = options.precompute ? std::min(std::max(0, options.precompute_slots), free) : 0;
        p.micro_slots = std::min(expected, free - p.precompute_slots);
        p.macro_cores = procs - db_cores - p.micro_slots - p.precompute_slots;
        const int db_core = p.macro_cores;
        const int micro_base = db_core + db_cores;
        // one macro step, one database pass and the micro runs in waves over the slots
        for (const auto& id : embedding.submodels_with(Role::Macro)) {
            if (perf.count(id)) p.predicted_period += eval_time(perf.at(id), p.macro_cores);
        }
        for (const auto& id : embedding.submodels_with(Role::Database)) {
            if (perf.count(id)) p.predicted_period += eval_time(perf.at(id), 1);
        }
        if (expected > 0) {
            const int waves = p.micro_slots > 0 ? (expected + p.micro_slots - 1) / p.micro_slots : expected;
            for (const auto& id : embedding.submodels_with(Role::Micro)) {
                if (perf.count(id)) p.predicted_period += waves * eval_time(perf.at(id), 1);
            }
        }
        p.recovery = {{Role::Macro, RecoveryPolicy::RestartTask},
                      {Role::Database, RecoveryPolicy::RestartTask},
                      {Role::Micro, RecoveryPolicy::MustRestart}};
        for (const auto& n : g.nodes()) {
            const Role r = detail::role_for(embedding, n.submodel, Role::Macro);
            if (r == Role::Micro) {
                if (p.micro_slots > 0) {
                    assign(n, detail::core_range(physical, micro_base + n.instance % p.micro_slots, 1), 1.0, r);
                } else {
                    // no reserved micro cores: runs are served from the manager's core
                    assign(n, detail::core_range(physical, has_db ? db_core : 0, 1), 1.0, r);
                }
            } else if (r == Role::Database) {
                assign(n, detail::core_range(physical, db_core, 1), 1.0, r);
            } else {
                assign(n, detail::core_range(physical, 0, p.macro_cores), 1.0, r);
            }
        }
        return p;
    }

    // replica computing
    p.mode = ExecMode::Sequential;
    p.quality = options.quality;
    const auto reps = embedding.submodels_with(Role::Replica);
    if (reps.size() != 1) throw std::invalid_argument("RC embedding needs exactly one replica submodel");
    p.n_replicas = detail::instances_in(g, reps.front());
    if (options.replica_cores < 1 || options.master_cores < 1) throw std::invalid_argument("core counts must be >= 1");
    if (options.replica_cores > procs || options.master_cores > procs)
        throw PlanError("infeasible: a single task needs more cores than the machine has");
    p.replica_slots = std::max(1, std::min(p.n_replicas, procs / options.replica_cores));
    p.waves = p.n_replicas == 0 ? 0 : (p.n_replicas + p.replica_slots - 1) / p.replica_slots;
    p.predicted_period = p.waves * eval_time(detail::perf_for(perf, reps.front()), options.replica_cores);
    p.recovery = {{Role::Replica, RecoveryPolicy::SkipIfQualityOk}, {Role::Master, RecoveryPolicy::RestartTask}};
    for (const auto& n : g.nodes()) {
        const Role r = detail::role_for(embedding, n.submodel, Role::Master);
        if (r == Role::Replica) {
            const int slot = n.instance % p.replica_slots;
            assign(n, detail::core_range(physical, slot * options.replica_cores, options.replica_cores), 1.0, r);
        } else {
            assign(n, detail::core_range(physical, 0, options.master_cores), 1.0, r);
        }
    }
    return p;
}

/// ES workload of `jobs` units: one chain for sequential execution, two
/// independent streams sharing the jobs for interleaved execution.
inline TaskGraph es_workload(const MultiscaleModel& m, int jobs, ExecMode mode,
                             const std::map<std::string, int>& instance_counts = {}) {
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (mode == ExecMode::Sequential || jobs == 1) return unfold(m, jobs, instance_counts);
    TaskGraph g;
    append_stream(g, unfold(m, (jobs + 1) / 2, instance_counts), 0);
    append_stream(g, unfold(m, jobs / 2, instance_counts), 1);
    return g;
}

}  // namespace mcp
