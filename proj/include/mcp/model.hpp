#pragma once

// Multiscale model description: submodels, couplings, validation and the
// scale separation map.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcp {

enum class PatternHint { ES, HMC, RCStatic, RCDynamic, RCExchange, Auto };

enum class RoleHint { None, Primary, Auxiliary, Macro, Micro, Replica, Master };

enum class CouplingKind { Init, PerCycle, Final };

inline std::string_view to_string(PatternHint h) {
    switch (h) {
    case PatternHint::ES: return "ES";
    case PatternHint::HMC: return "HMC";
    case PatternHint::RCStatic: return "RC-static";
    case PatternHint::RCDynamic: return "RC-dynamic";
    case PatternHint::RCExchange: return "RC-exchange";
    case PatternHint::Auto: return "auto";
    }
    return "?";
}

inline std::optional<PatternHint> pattern_hint_from_string(std::string_view s) {
    for (auto h : {PatternHint::ES, PatternHint::HMC, PatternHint::RCStatic, PatternHint::RCDynamic,
                   PatternHint::RCExchange, PatternHint::Auto}) {
        if (to_string(h) == s) return h;
    }
    return std::nullopt;
}

inline std::string_view to_string(RoleHint r) {
    switch (r) {
    case RoleHint::None: return "none";
    case RoleHint::Primary: return "primary";
    case RoleHint::Auxiliary: return "auxiliary";
    case RoleHint::Macro: return "macro";
    case RoleHint::Micro: return "micro";
    case RoleHint::Replica: return "replica";
    case RoleHint::Master: return "master";
    }
    return "?";
}

inline std::optional<RoleHint> role_hint_from_string(std::string_view s) {
    for (auto r : {RoleHint::None, RoleHint::Primary, RoleHint::Auxiliary, RoleHint::Macro, RoleHint::Micro,
                   RoleHint::Replica, RoleHint::Master}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

inline std::string_view to_string(CouplingKind k) {
    switch (k) {
    case CouplingKind::Init: return "init";
    case CouplingKind::PerCycle: return "per_cycle";
    case CouplingKind::Final: return "final";
    }
    return "?";
}

inline std::optional<CouplingKind> coupling_kind_from_string(std::string_view s) {
    for (auto k : {CouplingKind::Init, CouplingKind::PerCycle, CouplingKind::Final}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

/// Instance count of a submodel: a fixed k >= 1, or decided at plan time.
class Multiplicity {
public:
    static Multiplicity fixed(int k) { return Multiplicity(false, k); }
    static Multiplicity dynamic() { return Multiplicity(true, 0); }

    Multiplicity() = default;

    bool is_dynamic() const { return dynamic_; }
    int count() const { return count_; }

    bool operator==(const Multiplicity&) const = default;

private:
    Multiplicity(bool dynamic, int k) : dynamic_(dynamic), count_(k) {}

    bool dynamic_ = false;
    int count_ = 1;
};

struct Submodel {
    std::string id;
    double dt = 1.0;       // seconds
    double t_total = 1.0;  // seconds
    double dx = 1.0;       // meters
    double x_total = 1.0;  // meters
    Multiplicity multiplicity;
    std::optional<RoleHint> role_hint;
    std::optional<std::string> perf;

    bool operator==(const Submodel&) const = default;
};

struct Coupling {
    std::string from;
    std::string to;
    CouplingKind kind = CouplingKind::PerCycle;
    std::uint64_t payload_bytes = 0;

    bool operator==(const Coupling&) const = default;
};

struct MultiscaleModel {
    std::string name;
    std::vector<Submodel> submodels;
    std::vector<Coupling> couplings;
    std::optional<PatternHint> pattern_hint;

    const Submodel* find(std::string_view id) const {
        auto it = std::find_if(submodels.begin(), submodels.end(), [&](const Submodel& s) { return s.id == id; });
        return it == submodels.end() ? nullptr : &*it;
    }

    /// Declaration index of a submodel, or -1.
    int index_of(std::string_view id) const {
        for (std::size_t i = 0; i < submodels.size(); ++i) {
            if (submodels[i].id == id) return static_cast<int>(i);
        }
        return -1;
    }

    bool operator==(const MultiscaleModel&) const = default;
};

/// What a diagnostic is about; `index` points into submodels or couplings.
enum class Subject { Model, Submodel, Coupling };

struct Diagnostic {
    Subject subject = Subject::Model;
    std::size_t index = 0;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

/// Submodels that start the per-cycle dependency relation: targets of an init
/// coupling, or submodels without any per_cycle predecessor. Declaration order.
inline std::vector<std::string> entry_submodels(const MultiscaleModel& m) {
    std::set<std::string> init_targets, has_pred;
    for (const auto& c : m.couplings) {
        if (c.kind == CouplingKind::Init) init_targets.insert(c.to);
        if (c.kind == CouplingKind::PerCycle) has_pred.insert(c.to);
    }
    std::vector<std::string> out;
    for (const auto& s : m.submodels) {
        if (init_targets.count(s.id) || !has_pred.count(s.id)) out.push_back(s.id);
    }
    return out;
}

/// Checks every type invariant plus the existence of a starting point.
/// Diagnostics come out in a fixed order: model, submodels, couplings, global.
inline std::vector<Diagnostic> validate_model(const MultiscaleModel& m) {
    std::vector<Diagnostic> out;
    auto add = [&](Subject s, std::size_t i, std::string msg) { out.push_back({s, i, std::move(msg)}); };

    if (m.submodels.empty()) add(Subject::Model, 0, "model has no submodels");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < m.submodels.size(); ++i) {
        const auto& s = m.submodels[i];
        const std::string tag = "submodel '" + s.id + "': ";
        if (!seen.insert(s.id).second) add(Subject::Submodel, i, "duplicate submodel id '" + s.id + "'");
        if (!(s.dt > 0) || !(s.t_total > 0) || !(s.dx > 0) || !(s.x_total > 0))
            add(Subject::Submodel, i, tag + "nonpositive scale value");
        if (s.dt > s.t_total) add(Subject::Submodel, i, tag + "dt exceeds temporal extent");
        if (s.dx > s.x_total) add(Subject::Submodel, i, tag + "dx exceeds spatial extent");
        if (!s.multiplicity.is_dynamic() && s.multiplicity.count() < 1)
            add(Subject::Submodel, i, tag + "fixed multiplicity must be >= 1");
    }

    for (std::size_t i = 0; i < m.couplings.size(); ++i) {
        const auto& c = m.couplings[i];
        const auto* from = m.find(c.from);
        const auto* to = m.find(c.to);
        if (!from) add(Subject::Coupling, i, "unknown coupling endpoint '" + c.from + "'");
        if (!to) add(Subject::Coupling, i, "unknown coupling endpoint '" + c.to + "'");
        if (c.from == c.to) add(Subject::Coupling, i, "coupling from '" + c.from + "' to itself");
        if (from && to && from->multiplicity.is_dynamic() && to->multiplicity.is_dynamic())
            add(Subject::Coupling, i, "coupling between two dynamic-multiplicity submodels");
    }

    if (!m.submodels.empty() && entry_submodels(m).empty()) add(Subject::Model, 0, "no starting point");
    return out;
}

// ---------------------------------------------------------------------------
// Scale separation map

enum class ScaleRelation { Separated, Overlapping, Contiguous };

inline std::string_view to_string(ScaleRelation r) {
    switch (r) {
    case ScaleRelation::Separated: return "separated";
    case ScaleRelation::Overlapping: return "overlapping";
    case ScaleRelation::Contiguous: return "contiguous";
    }
    return "?";
}

struct ScaleBox {
    double lo = 0;
    double hi = 0;
};

/// Closed-interval classification; a shared endpoint is contiguous.
inline ScaleRelation classify_interval(ScaleBox a, ScaleBox b) {
    if (a.hi < b.lo || b.hi < a.lo) return ScaleRelation::Separated;
    // exactly one shared endpoint; two identical point boxes share both
    if ((a.hi == b.lo) != (b.hi == a.lo)) return ScaleRelation::Contiguous;
    return ScaleRelation::Overlapping;
}

struct ScaleEntry {
    std::string submodel;
    ScaleBox temporal;
    ScaleBox spatial;
};

struct ScaleSeparationMap {
    std::vector<ScaleEntry> entries;
    // keyed by (i, j) declaration indices with i < j
    std::map<std::pair<std::size_t, std::size_t>, ScaleRelation> temporal;

    ScaleRelation relation(std::size_t i, std::size_t j) const {
        if (i == j) return ScaleRelation::Overlapping;
        return temporal.at({std::min(i, j), std::max(i, j)});
    }

    ScaleRelation relation(std::string_view a, std::string_view b) const {
        std::size_t ia = entries.size(), ib = entries.size();
        for (std::size_t k = 0; k < entries.size(); ++k) {
            if (entries[k].submodel == a) ia = k;
            if (entries[k].submodel == b) ib = k;
        }
        if (ia == entries.size() || ib == entries.size()) throw std::out_of_range("unknown submodel in scale map");
        return relation(ia, ib);
    }
};

inline ScaleSeparationMap scale_separation_map(const MultiscaleModel& m) {
    ScaleSeparationMap map;
    for (const auto& s : m.submodels) map.entries.push_back({s.id, {s.dt, s.t_total}, {s.dx, s.x_total}});
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        for (std::size_t j = i + 1; j < map.entries.size(); ++j) {
            map.temporal[{i, j}] = classify_interval(map.entries[i].temporal, map.entries[j].temporal);
        }
    }
    return map;
}

}  // namespace mcp
