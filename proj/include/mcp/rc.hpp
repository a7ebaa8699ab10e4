#pragma once

#include <stdexcept>

namespace mcp {

/// Progress of a replica ensemble. `failed` counts replicas given up on.
struct RcState {
    int n_replicas = 1;
    int completed = 0;
    int failed = 0;
    double quality = 0.9;      // minimum surviving fraction
    int exchange_interval = 1;
    int feedback_rounds = 1;

    void validate() const {
        if (n_replicas < 1) throw std::invalid_argument("ensemble needs at least one replica");
        if (completed < 0 || failed < 0 || completed + failed > n_replicas)
            throw std::invalid_argument("inconsistent replica counts");
        if (!(quality > 0 && quality <= 1)) throw std::invalid_argument("quality threshold must be in (0, 1]");
        if (exchange_interval < 1 || feedback_rounds < 1) throw std::invalid_argument("interval and rounds must be >= 1");
    }
};

enum class RcAction { Continue, RestartReplica };

/// Decides on a replica that just failed; `state.failed` already includes it.
/// The ensemble tolerates the loss while the surviving fraction stays at or
/// above the quality threshold.
inline RcAction rc_on_failure(const RcState& state) {
    state.validate();
    const double surviving = state.n_replicas - state.failed;
    return surviving >= state.quality * state.n_replicas - 1e-9 ? RcAction::Continue : RcAction::RestartReplica;
}

}  // namespace mcp
