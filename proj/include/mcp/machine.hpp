#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mcp/perf.hpp"

namespace mcp {

/// Nodes [first_node, last_node] fail `multiplier` times as often as the base rate.
struct ReliabilityClass {
    int first_node = 0;
    int last_node = 0;
    double multiplier = 1;
};

/// Synthetic cluster: cores, frequency levels and power, failure rates.
struct MachineModel {
    int nodes = 1;
    int cores_per_node = 1;
    EnergyModel energy;
    double lambda_core = 0;  // failures per core-second
    std::vector<ReliabilityClass> reliability;

    int total_cores() const { return nodes * cores_per_node; }
    int node_of(int core) const { return core / cores_per_node; }

    double multiplier_of_core(int core) const {
        const int n = node_of(core);
        for (const auto& rc : reliability) {
            if (n >= rc.first_node && n <= rc.last_node) return rc.multiplier;
        }
        return 1.0;
    }

    /// Physical cores ordered from most to least reliable; index order breaks ties.
    std::vector<int> cores_by_reliability() const {
        std::vector<int> cores(static_cast<std::size_t>(total_cores()));
        std::iota(cores.begin(), cores.end(), 0);
        std::stable_sort(cores.begin(), cores.end(),
                         [&](int a, int b) { return multiplier_of_core(a) < multiplier_of_core(b); });
        return cores;
    }

    void validate() const {
        if (nodes < 1 || cores_per_node < 1) throw std::invalid_argument("machine needs at least one core");
        if (!(lambda_core >= 0)) throw std::invalid_argument("lambda_core must be nonnegative");
        for (const auto& rc : reliability) {
            if (rc.first_node < 0 || rc.last_node < rc.first_node || rc.last_node >= nodes)
                throw std::invalid_argument("reliability class node range out of bounds");
            if (!(rc.multiplier >= 0)) throw std::invalid_argument("reliability multiplier must be nonnegative");
        }
        energy.validate();
    }
};

}  // namespace mcp
