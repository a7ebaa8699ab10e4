#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "mcp/mcp.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) { return std::string(MCP_DATA_DIR) + "/" + name; }

inline std::string data(const std::string& name) { return mcp::read_file(data_path(name)); }

inline const char* const kIsr3d = R"(model isr3d
submodel smc dt=1d total=30d dx=10um extent=5mm
submodel bf dt=1ms total=1s dx=10um extent=5mm
submodel dd dt=1ms total=10s dx=10um extent=5mm
couple smc -> bf kind=per_cycle
couple smc -> dd kind=per_cycle
couple bf -> smc kind=per_cycle
couple dd -> smc kind=per_cycle
couple bf -> smc kind=init
)";

inline mcp::MultiscaleModel isr3d() { return mcp::parse_model(kIsr3d); }

/// Primary `pr` followed by an auxiliary `aux` in every job.
inline mcp::MultiscaleModel pr_aux() {
    return mcp::parse_model(R"(model pr_aux
submodel pr dt=1ms total=1s dx=1um extent=1mm
submodel aux dt=1s total=1d dx=1mm extent=1m
couple pr -> aux kind=per_cycle
)");
}

inline mcp::MachineModel machine(int cores, double lambda = 0, std::vector<double> f_levels = {1.0}) {
    mcp::MachineModel m;
    m.nodes = 1;
    m.cores_per_node = cores;
    m.lambda_core = lambda;
    m.energy.f_levels = std::move(f_levels);
    return m;
}

inline mcp::Submodel sub(const std::string& id, int k = 1) {
    mcp::Submodel s;
    s.id = id;
    s.multiplicity = k > 0 ? mcp::Multiplicity::fixed(k) : mcp::Multiplicity::dynamic();
    return s;
}

/// Random model that validates and is deadlock free; rejection sampled.
inline mcp::MultiscaleModel random_valid_model(std::mt19937_64& rng, std::map<std::string, int>* counts = nullptr) {
    using namespace mcp;
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (;;) {
        MultiscaleModel m;
        m.name = "random";
        const int n = pick(1, 6);
        bool have_dynamic = false;
        for (int i = 0; i < n; ++i) {
            Submodel s;
            s.id = "s" + std::to_string(i);
            s.dt = std::ldexp(1.0, pick(-10, 0));
            s.t_total = s.dt * pick(1, 100);
            s.dx = std::ldexp(1.0, pick(-10, 0));
            s.x_total = s.dx * pick(1, 100);
            if (!have_dynamic && pick(0, 9) == 0) {
                s.multiplicity = Multiplicity::dynamic();
                have_dynamic = true;
            } else {
                s.multiplicity = Multiplicity::fixed(pick(1, 3));
            }
            m.submodels.push_back(s);
        }
        const int nc = n == 1 ? 0 : pick(0, 2 * n);
        for (int c = 0; c < nc; ++c) {
            int a = pick(0, n - 1), b = pick(0, n - 1);
            if (a == b) continue;
            const int kind = pick(0, 9);
            Coupling cp{m.submodels[a].id, m.submodels[b].id,
                        kind < 7 ? CouplingKind::PerCycle : kind < 9 ? CouplingKind::Init : CouplingKind::Final,
                        static_cast<std::uint64_t>(pick(0, 2) * 512)};
            if (m.submodels[a].multiplicity.is_dynamic() && m.submodels[b].multiplicity.is_dynamic()) continue;
            m.couplings.push_back(cp);
        }
        if (!validate_model(m).empty() || detect_deadlock(m)) continue;
        if (counts) {
            counts->clear();
            for (const auto& s : m.submodels) {
                if (s.multiplicity.is_dynamic()) (*counts)[s.id] = pick(1, 3);
            }
        }
        return m;
    }
}

/// Transitive reachability u ->* v.
inline bool reaches(const mcp::TaskGraph& g, std::size_t u, std::size_t v) {
    std::vector<std::size_t> stack{u};
    std::vector<bool> seen(g.size(), false);
    while (!stack.empty()) {
        auto x = stack.back();
        stack.pop_back();
        if (x == v) return true;
        if (seen[x]) continue;
        seen[x] = true;
        for (auto s : g.successors(x)) stack.push_back(s);
    }
    return false;
}

}  // namespace fixtures
