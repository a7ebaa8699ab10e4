#pragma once

// Discrete-event execution of a plan: list scheduling in plan order,
// exponential task failures, per-role recovery and energy accounting.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "mcp/hmc.hpp"
#include "mcp/machine.hpp"
#include "mcp/plan.hpp"
#include "mcp/rc.hpp"

namespace mcp {

class SimulationAborted : public std::runtime_error {
public:
    SimulationAborted(NodeId task, int failures)
        : std::runtime_error("task '" + task + "' failed " + std::to_string(failures) + " times, giving up"),
          task_(std::move(task)) {}
    const NodeId& task() const { return task_; }

private:
    NodeId task_;
};

struct SimOptions {
    int max_retries = 10;

    // HMC manager: micro tasks with a query point consult the database first
    std::optional<HmcDatabase> hmc_db;
    std::map<NodeId, std::vector<double>> hmc_queries;
    double hmc_latency = 0;  // seconds per manager decision
    std::function<std::vector<double>(const std::vector<double>&)> micro_result;  // default: the query itself
};

enum class TaskStatus { Done, Cached, Abandoned, Skipped };

inline std::string_view to_string(TaskStatus s) {
    switch (s) {
    case TaskStatus::Done: return "done";
    case TaskStatus::Cached: return "cached";
    case TaskStatus::Abandoned: return "abandoned";
    case TaskStatus::Skipped: return "skipped";
    }
    return "?";
}

struct TaskRecord {
    double start = 0;  // start of the last attempt
    double end = 0;
    int retries = 0;
    TaskStatus status = TaskStatus::Done;
    std::vector<int> cores;
};

struct FailureRecord {
    double time = 0;
    NodeId task;
    std::vector<int> cores;
};

struct SimReport {
    std::uint64_t seed = 0;
    double makespan = 0;
    double energy_joules = 0;
    double core_seconds = 0;
    double efficiency_observed = 0;
    std::map<NodeId, TaskRecord> per_task;
    std::vector<FailureRecord> failures;
    int restarts = 0;       // restart_task re-runs
    int must_restarts = 0;  // must_restart re-runs
    int rc_restarts = 0;    // replicas re-run because quality would drop below threshold
    std::optional<double> quality;
    int hmc_reused = 0;
    int hmc_interpolated = 0;
    int hmc_launched = 0;
};

namespace detail {

// uniform in [0, 1) from the top 53 bits, identical on every standard library
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

inline SimReport simulate(const ExecutionPlan& plan, const TaskGraph& g, const std::map<std::string, PerfModel>& perf,
                          const MachineModel& machine, std::uint64_t seed, SimOptions options = {}) {
    machine.validate();
    if (options.max_retries < 1) throw std::invalid_argument("max_retries must be >= 1");
    const auto n = g.size();
    std::vector<std::size_t> rank(n);
    if (plan.order.size() != n) throw std::invalid_argument("plan order does not cover the graph");
    for (std::size_t r = 0; r < n; ++r) rank[g.require(plan.order[r])] = r;
    // node ids and assignments are both id-ordered, so one merge pass pairs them
    const auto by_id = g.indices_by_id();
    std::vector<const Assignment*> asg(n);
    auto ait = plan.assignments.begin();
    for (auto i : by_id) {
        const auto& id = g.nodes()[i].id;
        while (ait != plan.assignments.end() && ait->first < id) ++ait;
        if (ait == plan.assignments.end() || ait->first != id)
            throw std::invalid_argument("node '" + id + "' has no assignment");
        for (int c : ait->second.cores) {
            if (c < 0 || c >= machine.total_cores()) throw std::invalid_argument("assignment uses a core outside the machine");
        }
        asg[i] = &ait->second;
    }

    SimReport rep;
    rep.seed = seed;
    std::mt19937_64 rng(seed);
    auto& db = options.hmc_db;
    if (!options.micro_result) options.micro_result = [](const std::vector<double>& q) { return q; };

    const bool rc = is_replica_computing(plan.pattern);
    RcState rc_state;
    rc_state.n_replicas = std::max(1, plan.n_replicas);
    rc_state.quality = plan.quality;
    std::set<int> abandoned_instances;

    std::vector<int> waiting(n), failures(n, 0);
    std::vector<bool> finished(n, false);
    for (std::size_t i = 0; i < n; ++i) waiting[i] = static_cast<int>(g.in_degree(i));
    std::vector<bool> core_busy(static_cast<std::size_t>(machine.total_cores()), false);
    int idle_cores = machine.total_cores();
    std::set<std::size_t> ready;  // ranks
    int ready_coreless = 0;
    auto make_ready = [&](std::size_t i) {
        ready.insert(rank[i]);
        if (asg[i]->cores.empty()) ++ready_coreless;
    };
    std::vector<std::size_t> by_rank(n);
    for (std::size_t i = 0; i < n; ++i) by_rank[rank[i]] = i;
    for (std::size_t i = 0; i < n; ++i) {
        if (waiting[i] == 0) make_ready(i);
    }

    struct Running {
        double start, duration;  // duration at the assigned frequency
        bool fails;
        bool holds_cores;
        std::optional<std::vector<double>> insert_point;
    };
    std::vector<std::optional<Running>> running(n);
    // simultaneous events resolve in task id order; id_order[i] is node i's position among sorted ids
    std::vector<std::size_t> id_order(n);
    for (std::size_t k = 0; k < n; ++k) id_order[by_id[k]] = k;
    std::vector<TaskRecord> recs(n);
    using Event = std::tuple<double, std::size_t, std::size_t>;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;

    auto duration_of = [&](std::size_t i, std::optional<std::vector<double>>& insert_point,
                           TaskStatus& status) -> double {
        const auto& node = g.nodes()[i];
        const auto& a = *asg[i];
        if (node.phase != Phase::Cycle || a.cores.empty()) return 0.0;
        if (rc && a.role == Role::Replica && abandoned_instances.count(node.instance)) {
            status = TaskStatus::Skipped;
            return 0.0;
        }
        const double run = eval_time(detail::perf_for(perf, node.submodel), static_cast<int>(a.cores.size())) / a.frequency;
        if (a.role == Role::Micro && db) {
            auto q = options.hmc_queries.find(node.id);
            if (q != options.hmc_queries.end()) {
                auto d = hmc_decide(*db, q->second);
                if (d.kind == HmcDecision::Kind::Reuse) {
                    ++rep.hmc_reused;
                    status = TaskStatus::Cached;
                    return options.hmc_latency;
                }
                if (d.kind == HmcDecision::Kind::Interpolated) {
                    ++rep.hmc_interpolated;
                    status = TaskStatus::Cached;
                    return options.hmc_latency;
                }
                ++rep.hmc_launched;
                insert_point = q->second;
                return options.hmc_latency + run;
            }
        }
        return run;
    };

    auto try_start = [&](double now) {
        for (auto it = ready.begin(); it != ready.end();) {
            const std::size_t i = by_rank[*it];
            const auto& a = *asg[i];
            if (idle_cores == 0 && ready_coreless == 0) break;
            if (static_cast<int>(a.cores.size()) > idle_cores) {
                ++it;
                continue;
            }
            bool free = true;
            for (int c : a.cores) free = free && !core_busy[static_cast<std::size_t>(c)];
            if (!free) {
                ++it;
                continue;
            }
            it = ready.erase(it);
            if (a.cores.empty()) --ready_coreless;
            std::optional<std::vector<double>> insert_point;
            TaskStatus status = TaskStatus::Done;
            const double dur = duration_of(i, insert_point, status);
            double end = now + dur;
            bool fails = false;
            const bool holds = dur > 0 && status != TaskStatus::Skipped;
            if (holds) {
                double mult = 0;
                for (int c : a.cores) mult = std::max(mult, machine.multiplier_of_core(c));
                const double rate = machine.lambda_core * static_cast<double>(a.cores.size()) * mult;
                if (rate > 0) {
                    const double t_fail = -std::log1p(-detail::unit_uniform(rng)) / rate;
                    if (t_fail < dur) {
                        fails = true;
                        end = now + t_fail;
                    }
                }
                for (int c : a.cores) core_busy[static_cast<std::size_t>(c)] = true;
                idle_cores -= static_cast<int>(a.cores.size());
            }
            auto& rec = recs[i];
            rec.start = now;
            rec.status = status;
            rec.cores = status == TaskStatus::Skipped ? std::vector<int>{} : a.cores;
            running[i] = Running{now, dur, fails, holds, std::move(insert_point)};
            events.emplace(end, id_order[i], i);
        }
    };

    auto complete = [&](std::size_t i, double now) {
        finished[i] = true;
        recs[i].end = now;
        for (auto s : g.successors(i)) {
            if (--waiting[s] == 0) make_ready(s);
        }
    };

    try_start(0.0);
    std::size_t done = 0;
    while (!events.empty()) {
        const double now = std::get<0>(events.top());
        while (!events.empty() && std::get<0>(events.top()) == now) {
            const std::size_t i = std::get<2>(events.top());
            events.pop();
            const auto& node = g.nodes()[i];
            const auto& a = *asg[i];
            Running r = *running[i];
            running[i].reset();
            auto& rec = recs[i];
            const double elapsed = now - r.start;
            if (r.holds_cores) {
                for (int c : a.cores) core_busy[static_cast<std::size_t>(c)] = false;
                idle_cores += static_cast<int>(a.cores.size());
                const int k = static_cast<int>(a.cores.size());
                rep.energy_joules += energy_of(elapsed * a.frequency, k, a.frequency, machine.energy);
                rep.core_seconds += k * elapsed;
            }
            if (!r.fails) {
                if (r.insert_point) db->insert(*r.insert_point, options.micro_result(*r.insert_point), true);
                complete(i, now);
                ++done;
                continue;
            }

            rep.failures.push_back({now, node.id, a.cores});
            ++failures[i];
            rec.retries = failures[i];
            const auto policy = plan.policy_for(a.role);
            if (policy == RecoveryPolicy::SkipIfQualityOk && rc && a.role == Role::Replica) {
                RcState s = rc_state;
                s.failed = static_cast<int>(abandoned_instances.size()) + 1;
                if (s.failed <= s.n_replicas && rc_on_failure(s) == RcAction::Continue) {
                    abandoned_instances.insert(node.instance);
                    rec.status = TaskStatus::Abandoned;
                    complete(i, now);
                    ++done;
                    continue;
                }
                ++rep.rc_restarts;
            } else if (policy == RecoveryPolicy::MustRestart) {
                ++rep.must_restarts;
            } else {
                ++rep.restarts;
            }
            if (failures[i] >= options.max_retries) throw SimulationAborted(node.id, failures[i]);
            make_ready(i);
        }
        try_start(now);
    }
    if (done != n) throw std::logic_error("simulation stalled: plan cannot run every task");

    double work = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = g.nodes()[i];
        rep.makespan = std::max(rep.makespan, recs[i].end);
        const auto st = recs[i].status;
        if (node.phase == Phase::Cycle && !asg[i]->cores.empty() && st == TaskStatus::Done)
            work += eval_time(detail::perf_for(perf, node.submodel), 1);
    }
    for (std::size_t i = 0; i < n; ++i)
        rep.per_task.emplace_hint(rep.per_task.end(), g.nodes()[by_id[i]].id, std::move(recs[by_id[i]]));
    if (rep.makespan > 0) rep.efficiency_observed = work / (plan.total_cores * rep.makespan);
    if (rc) rep.quality = 1.0 - static_cast<double>(abandoned_instances.size()) / rc_state.n_replicas;
    return rep;
}

}  // namespace mcp
