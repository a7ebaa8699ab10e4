#pragma once

// Performance models for single-scale submodels and the composite Extreme
// Scaling model: time and efficiency of a primary model coupled to auxiliary
// models, the processor split for interleaved execution, and energy under
// discrete frequency scaling.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mcp {

struct SerialLaw {
    double a = 1;  // time at any P
};

struct PerfectScalingLaw {
    double a = 1;  // time at P = 1
};

struct AmdahlLaw {
    double a = 1;  // time at P = 1
    double s = 0;  // serial fraction
};

struct TableLaw {
    std::vector<std::pair<int, double>> points;  // (P, time), sorted by P
};

/// Time-vs-processors model of one submodel; `problem_size` scales time linearly.
struct PerfModel {
    std::variant<SerialLaw, PerfectScalingLaw, AmdahlLaw, TableLaw> law;
    double problem_size = 1;

    static PerfModel serial(double a, double n = 1) { return checked({SerialLaw{a}, n}); }
    static PerfModel perfect(double a, double n = 1) { return checked({PerfectScalingLaw{a}, n}); }
    static PerfModel amdahl(double a, double s, double n = 1) { return checked({AmdahlLaw{a, s}, n}); }
    static PerfModel table(std::vector<std::pair<int, double>> pts, double n = 1) {
        std::sort(pts.begin(), pts.end());
        return checked({TableLaw{std::move(pts)}, n});
    }

private:
    static PerfModel checked(PerfModel pm);
};

inline PerfModel PerfModel::checked(PerfModel pm) {
    if (!(pm.problem_size > 0)) throw std::invalid_argument("problem size must be positive");
    std::visit(
        [](const auto& law) {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, TableLaw>) {
                if (law.points.empty()) throw std::invalid_argument("table needs at least one point");
                for (std::size_t i = 0; i < law.points.size(); ++i) {
                    const auto& [p, t] = law.points[i];
                    if (p < 1) throw std::invalid_argument("table processor counts must be >= 1");
                    if (!(t > 0)) throw std::invalid_argument("table times must be positive");
                    if (i > 0 && law.points[i - 1].first == p)
                        throw std::invalid_argument("table processor counts must be distinct");
                    if (i > 0 && law.points[i - 1].second < t)
                        throw std::invalid_argument("table times must be nonincreasing in P");
                }
            } else {
                if (!(law.a > 0)) throw std::invalid_argument("performance coefficient a must be positive");
                if constexpr (std::is_same_v<L, AmdahlLaw>) {
                    if (!(law.s >= 0 && law.s <= 1)) throw std::invalid_argument("serial fraction must be in [0, 1]");
                }
            }
        },
        pm.law);
    return pm;
}

struct TimeEval {
    double time = 0;
    bool clamped = false;  // table queried outside its processor range
};

/// Table lookups interpolate linearly in 1/P, so two points of a perfectly
/// scaling code reproduce it exactly. Outside the table P is clamped.
inline TimeEval eval_time_checked(const PerfModel& pm, int procs) {
    if (procs < 1) throw std::invalid_argument("processor count must be >= 1");
    const double p = procs;
    const double n = pm.problem_size;
    return std::visit(
        [&](const auto& law) -> TimeEval {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, SerialLaw>) {
                return {law.a * n, false};
            } else if constexpr (std::is_same_v<L, PerfectScalingLaw>) {
                return {law.a * n / p, false};
            } else if constexpr (std::is_same_v<L, AmdahlLaw>) {
                return {law.a * n * (law.s + (1 - law.s) / p), false};
            } else {
                const auto& pts = law.points;
                if (procs <= pts.front().first) return {pts.front().second * n, procs < pts.front().first};
                if (procs >= pts.back().first) return {pts.back().second * n, procs > pts.back().first};
                auto hi = std::lower_bound(pts.begin(), pts.end(), procs,
                                           [](const auto& pt, int q) { return pt.first < q; });
                if (hi->first == procs) return {hi->second * n, false};
                auto lo = std::prev(hi);
                const double x0 = 1.0 / lo->first, x1 = 1.0 / hi->first, x = 1.0 / p;
                const double w = (x - x1) / (x0 - x1);
                return {(hi->second + w * (lo->second - hi->second)) * n, false};
            }
        },
        pm.law);
}

inline double eval_time(const PerfModel& pm, int procs) { return eval_time_checked(pm, procs).time; }

/// Anything that yields a time for a processor count: a PerfModel or a callable.
template <class M>
concept TimeModel = std::same_as<std::remove_cvref_t<M>, PerfModel> || std::is_invocable_r_v<double, const M&, int>;

template <TimeModel M>
double time_at(const M& model, int procs) {
    if constexpr (std::same_as<std::remove_cvref_t<M>, PerfModel>) {
        return eval_time(model, procs);
    } else {
        if (procs < 1) throw std::invalid_argument("processor count must be >= 1");
        return static_cast<double>(model(procs));
    }
}

/// Sum of several submodel times run back to back on the same processors.
class CompositeTime {
public:
    CompositeTime() = default;
    explicit CompositeTime(std::vector<PerfModel> parts) : parts_(std::move(parts)) {}

    void add(const PerfModel& pm) { parts_.push_back(pm); }
    bool empty() const { return parts_.empty(); }

    double operator()(int procs) const {
        double t = 0;
        for (const auto& pm : parts_) t += eval_time(pm, procs);
        return t;
    }

private:
    std::vector<PerfModel> parts_;
};

// ---------------------------------------------------------------------------
// Extreme Scaling composite model

inline double es_time(double t_pr, double t_aux) {
    if (!(t_pr >= 0) || !(t_aux >= 0)) throw std::invalid_argument("times must be nonnegative");
    return t_pr + t_aux;
}

struct EsEfficiency {
    double exact = 0;   // (T_aux(1) + T_pr(1)) / (P (T_aux(P) + T_pr(P)))
    double approx = 0;  // eps_pr / (T_aux(P) / T_pr(P) + 1), dropping T_aux(1)
    double eps_pr = 0;  // T_pr(1) / (P T_pr(P))
};

template <TimeModel Pr, TimeModel Aux>
EsEfficiency es_efficiency(const Pr& pm_pr, const Aux& pm_aux, int procs) {
    const double p = procs;
    const double pr1 = time_at(pm_pr, 1), prp = time_at(pm_pr, procs);
    const double aux1 = time_at(pm_aux, 1), auxp = time_at(pm_aux, procs);
    EsEfficiency e;
    e.exact = (aux1 + pr1) / (p * (auxp + prp));
    e.eps_pr = pr1 / (p * prp);
    e.approx = e.eps_pr / (auxp / prp + 1);
    return e;
}

enum class ExecMode { Sequential, Interleaved };

inline std::string_view to_string(ExecMode m) { return m == ExecMode::Sequential ? "sequential" : "interleaved"; }

struct EsAllocation {
    int p1 = 1;  // primary processors
    int p2 = 1;  // auxiliary processors
    ExecMode mode = ExecMode::Interleaved;
    double t_pr = 0;   // T_pr(P1)
    double t_aux = 0;  // T_aux(P2)
    double period = 0;
    double imbalance = 0;
};

inline double imbalance_of(double a, double b) {
    const double hi = std::max(a, b);
    return hi > 0 ? std::abs(a - b) / hi : 0.0;
}

/// Exhaustive search over P1 + P2 = P minimizing max(T_pr(P1), T_aux(P2));
/// ties go to the smaller imbalance, then the smaller P2.
template <TimeModel Pr, TimeModel Aux>
EsAllocation optimal_split(const Pr& pm_pr, const Aux& pm_aux, int procs) {
    if (procs < 2) throw std::invalid_argument("a split needs at least 2 processors");
    std::optional<EsAllocation> best;
    for (int p2 = 1; p2 < procs; ++p2) {
        EsAllocation a;
        a.p1 = procs - p2;
        a.p2 = p2;
        a.t_pr = time_at(pm_pr, a.p1);
        a.t_aux = time_at(pm_aux, a.p2);
        a.period = std::max(a.t_pr, a.t_aux);
        a.imbalance = imbalance_of(a.t_pr, a.t_aux);
        if (!best || a.period < best->period || (a.period == best->period && a.imbalance < best->imbalance))
            best = a;
    }
    return *best;
}

struct ModeThresholds {
    double r_seq = 0.01;
};

struct ModeChoice {
    ExecMode mode = ExecMode::Sequential;
    double per_job = 0;                    // steady-state time per job of the chosen mode
    double sequential_per_job = 0;         // T_pr(P) + T_aux(P)
    std::optional<EsAllocation> split;     // present when P >= 2
};

/// Picks the execution mode with the better steady-state time per job.
/// Below the r_seq ratio the split search is skipped when no split can win:
/// any split period is at least T_pr(P - 1).
template <TimeModel Pr, TimeModel Aux>
ModeChoice choose_mode(const Pr& pm_pr, const Aux& pm_aux, int procs, ModeThresholds th = {}) {
    if (procs < 1) throw std::invalid_argument("processor count must be >= 1");
    ModeChoice c;
    const double prp = time_at(pm_pr, procs), auxp = time_at(pm_aux, procs);
    c.sequential_per_job = es_time(prp, auxp);
    c.per_job = c.sequential_per_job;
    if (procs == 1) return c;
    if (auxp / prp <= th.r_seq && c.sequential_per_job <= time_at(pm_pr, procs - 1)) return c;
    c.split = optimal_split(pm_pr, pm_aux, procs);
    if (c.split->period < c.sequential_per_job) {
        c.mode = ExecMode::Interleaved;
        c.per_job = c.split->period;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Energy

/// Per-core power p_static + p_dyn f^alpha at frequency fraction f; compute
/// time stretches as 1/f.
struct EnergyModel {
    double p_static = 1;
    double p_dyn = 3;
    double alpha = 3;
    std::vector<double> f_levels{1.0};

    double power(double f) const { return p_static + p_dyn * std::pow(f, alpha); }

    bool permits(double f) const {
        return std::any_of(f_levels.begin(), f_levels.end(), [&](double l) { return std::abs(l - f) <= 1e-12; });
    }

    void validate() const {
        if (!(p_static >= 0) || !(p_dyn >= 0) || !(p_static + p_dyn > 0))
            throw std::invalid_argument("power coefficients must be nonnegative with positive sum");
        if (!(alpha >= 0)) throw std::invalid_argument("alpha must be nonnegative");
        if (f_levels.empty()) throw std::invalid_argument("at least one frequency level required");
        for (double f : f_levels) {
            if (!(f > 0 && f <= 1)) throw std::invalid_argument("frequency levels must be in (0, 1]");
        }
        if (!permits(1.0)) throw std::invalid_argument("frequency levels must include 1");
    }
};

/// Energy of a task that takes `time_at_fmax` seconds at full frequency.
inline double energy_of(double time_at_fmax, int cores, double f, const EnergyModel& em) {
    if (!em.permits(f)) throw std::invalid_argument("frequency " + std::to_string(f) + " is not a permitted level");
    if (cores < 0) throw std::invalid_argument("core count must be nonnegative");
    if (!(time_at_fmax >= 0)) throw std::invalid_argument("time must be nonnegative");
    return cores * em.power(f) * (time_at_fmax / f);
}

struct FrequencyAssignment {
    double f_pr = 1;
    double f_aux = 1;
    double energy_per_period = 0;
    double period = 0;  // max of the two stretched times
};

/// Grid search over f_levels x f_levels for the least energy per period that
/// keeps both stretched times within period * (1 + slack_tol). Ties prefer
/// higher frequencies.
inline FrequencyAssignment energy_optimize_interleave(const EsAllocation& alloc, const EnergyModel& em,
                                                      double slack_tol = 0) {
    if (alloc.mode != ExecMode::Interleaved) throw std::invalid_argument("allocation must be interleaved");
    if (!(slack_tol >= 0)) throw std::invalid_argument("slack tolerance must be nonnegative");
    const double bound = alloc.period * (1 + slack_tol) * (1 + 1e-12);
    auto levels = em.f_levels;
    std::sort(levels.begin(), levels.end(), std::greater<>());
    std::optional<FrequencyAssignment> best;
    for (double fp : levels) {
        for (double fa : levels) {
            const double tp = alloc.t_pr / fp, ta = alloc.t_aux / fa;
            if (std::max(tp, ta) > bound) continue;
            const double e = energy_of(alloc.t_pr, alloc.p1, fp, em) + energy_of(alloc.t_aux, alloc.p2, fa, em);
            if (!best || e < best->energy_per_period) best = FrequencyAssignment{fp, fa, e, std::max(tp, ta)};
        }
    }
    if (!best) {
        // f = 1 on both sides always meets the bound
        const double e = energy_of(alloc.t_pr, alloc.p1, 1.0, em) + energy_of(alloc.t_aux, alloc.p2, 1.0, em);
        best = FrequencyAssignment{1.0, 1.0, e, alloc.period};
    }
    return *best;
}

}  // namespace mcp
