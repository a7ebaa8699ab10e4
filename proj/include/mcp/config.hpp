#pragma once

// Middleware configuration: a manifest plus one launch document per role
// (per replica for ensembles), all as key=value text.

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mcp/plan.hpp"

namespace mcp {

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// "0-19,21" style list of sorted core ids.
inline std::string format_cores(const std::set<int>& cores) {
    std::string out;
    for (auto it = cores.begin(); it != cores.end();) {
        int lo = *it, hi = lo;
        for (++it; it != cores.end() && *it == hi + 1; ++it) hi = *it;
        if (!out.empty()) out += ',';
        out += std::to_string(lo);
        if (hi > lo) out += '-' + std::to_string(hi);
    }
    return out;
}

namespace detail {

struct RoleGroup {
    std::set<int> cores;
    std::set<std::string> submodels;
    std::vector<NodeId> tasks;
    double frequency = 1;
};

inline void append_kv(std::string& doc, const std::string& key, const std::string& value) {
    doc += key;
    doc += '=';
    doc += value;
    doc += '\n';
}

}  // namespace detail

inline std::map<std::string, std::string> emit_middleware_config(const ExecutionPlan& plan) {
    const std::set<NodeId> residual(plan.residual.begin(), plan.residual.end());
    std::map<Role, detail::RoleGroup> roles;
    std::map<int, detail::RoleGroup> replicas;
    for (const auto& [id, a] : plan.assignments) {
        if (residual.count(id)) continue;
        auto& grp = (is_replica_computing(plan.pattern) && a.role == Role::Replica) ? replicas[a.instance] : roles[a.role];
        grp.cores.insert(a.cores.begin(), a.cores.end());
        grp.submodels.insert(a.submodel);
        grp.tasks.push_back(id);
        grp.frequency = a.frequency;
    }
    if (!replicas.empty()) {
        auto& all = roles[Role::Replica];
        for (const auto& [i, grp] : replicas) {
            all.cores.insert(grp.cores.begin(), grp.cores.end());
            all.submodels.insert(grp.submodels.begin(), grp.submodels.end());
            all.tasks.insert(all.tasks.end(), grp.tasks.begin(), grp.tasks.end());
        }
    }

    std::map<std::string, std::string> docs;
    std::string& man = docs["manifest.cfg"];
    detail::append_kv(man, "pattern", std::string(to_string(plan.pattern)));
    detail::append_kv(man, "mode", std::string(to_string(plan.mode)));
    detail::append_kv(man, "total_cores", std::to_string(plan.total_cores));
    detail::append_kv(man, "period_s", format_number(plan.predicted_period));
    if (plan.energy_budget_j) detail::append_kv(man, "energy_budget_j", format_number(*plan.energy_budget_j));
    if (plan.split) {
        detail::append_kv(man, "p1", std::to_string(plan.split->p1));
        detail::append_kv(man, "p2", std::to_string(plan.split->p2));
    }
    if (plan.pattern == PatternKind::HMC) {
        detail::append_kv(man, "micro_slots", std::to_string(plan.micro_slots));
        detail::append_kv(man, "precompute_slots", std::to_string(plan.precompute_slots));
    }
    if (is_replica_computing(plan.pattern)) {
        detail::append_kv(man, "replicas", std::to_string(plan.n_replicas));
        detail::append_kv(man, "replica_slots", std::to_string(plan.replica_slots));
        detail::append_kv(man, "waves", std::to_string(plan.waves));
        detail::append_kv(man, "quality", format_number(plan.quality));
    }
    for (const auto& [role, grp] : roles) {
        const std::string key = "role." + std::string(to_string(role));
        detail::append_kv(man, key + ".cores", std::to_string(grp.cores.size()));
        detail::append_kv(man, key + ".frequency", format_number(grp.frequency));
    }
    if (!residual.empty()) {
        man += "\n[residual]\n";
        std::string list;
        for (const auto& id : plan.residual) list += (list.empty() ? "" : ",") + id;
        detail::append_kv(man, "tasks", list);
    }

    auto launch = [&](const std::string& name, Role role, const detail::RoleGroup& grp, int instance) {
        std::string doc = "[role." + std::string(to_string(role)) + "]\n";
        std::string subs;
        for (const auto& s : grp.submodels) subs += (subs.empty() ? "" : ",") + s;
        detail::append_kv(doc, "submodels", subs);
        if (instance >= 0) detail::append_kv(doc, "instance", std::to_string(instance));
        detail::append_kv(doc, "cores", format_cores(grp.cores));
        detail::append_kv(doc, "frequency", format_number(grp.frequency));
        detail::append_kv(doc, "recovery", std::string(to_string(plan.policy_for(role))));
        detail::append_kv(doc, "tasks", std::to_string(grp.tasks.size()));
        docs[name] = doc;
    };
    for (const auto& [role, grp] : roles) {
        if (role == Role::Replica && !replicas.empty()) continue;
        launch("launch_" + std::string(to_string(role)) + ".cfg", role, grp, -1);
    }
    for (const auto& [i, grp] : replicas) launch("launch_replica_" + std::to_string(i) + ".cfg", Role::Replica, grp, i);
    return docs;
}

}  // namespace mcp
