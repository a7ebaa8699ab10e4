#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "mcp/plan.hpp"
#include "mcp/simulate.hpp"

namespace mcp {

// nlohmann::json objects are std::map backed, so keys come out sorted.
inline nlohmann::json to_json(const SimReport& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["makespan"] = r.makespan;
    j["energy_joules"] = r.energy_joules;
    j["core_seconds"] = r.core_seconds;
    j["efficiency_observed"] = r.efficiency_observed;
    j["restarts"] = r.restarts;
    j["must_restarts"] = r.must_restarts;
    j["rc_restarts"] = r.rc_restarts;
    j["quality"] = r.quality ? nlohmann::json(*r.quality) : nlohmann::json(nullptr);
    j["hmc"] = {{"reused", r.hmc_reused}, {"interpolated", r.hmc_interpolated}, {"launched", r.hmc_launched}};
    auto& fails = j["failures"] = nlohmann::json::array();
    for (const auto& f : r.failures) fails.push_back({{"time", f.time}, {"task", f.task}, {"cores", f.cores}});
    auto& tasks = j["per_task"] = nlohmann::json::object();
    for (const auto& [id, t] : r.per_task) {
        tasks[id] = {{"start", t.start},
                     {"end", t.end},
                     {"retries", t.retries},
                     {"status", std::string(to_string(t.status))},
                     {"cores", t.cores}};
    }
    return j;
}

inline std::string report_json(const SimReport& r) { return to_json(r).dump(2) + "\n"; }

inline nlohmann::json to_json(const ExecutionPlan& p) {
    nlohmann::json j;
    j["pattern"] = std::string(to_string(p.pattern));
    j["mode"] = std::string(to_string(p.mode));
    j["total_cores"] = p.total_cores;
    j["predicted_period"] = p.predicted_period;
    j["order"] = p.order;
    j["residual"] = p.residual;
    auto& rec = j["recovery"] = nlohmann::json::object();
    for (const auto& [role, pol] : p.recovery) rec[std::string(to_string(role))] = std::string(to_string(pol));
    auto& asg = j["assignments"] = nlohmann::json::object();
    for (const auto& [id, a] : p.assignments) {
        asg[id] = {{"cores", a.cores}, {"frequency", a.frequency}, {"role", std::string(to_string(a.role))}};
    }
    if (p.split) j["split"] = {{"p1", p.split->p1}, {"p2", p.split->p2}, {"period", p.split->period}};
    if (p.frequencies) j["frequencies"] = {{"f_pr", p.frequencies->f_pr}, {"f_aux", p.frequencies->f_aux}};
    if (p.efficiency) {
        j["efficiency"] = {{"exact", p.efficiency->exact}, {"approx", p.efficiency->approx}, {"eps_pr", p.efficiency->eps_pr}};
    }
    return j;
}

}  // namespace mcp
