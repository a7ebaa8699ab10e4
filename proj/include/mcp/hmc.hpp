#pragma once

// On-the-fly database between a macroscale model and its microscale
// simulations: reuse cached results, interpolate between them, or launch a
// new microscale run.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mcp {

enum class Interpolation { None, LinearWithinHull };

struct HmcPolicy {
    double delta_reuse = 0;  // Euclidean distance accepted as an exact hit
    Interpolation interpolation = Interpolation::LinearWithinHull;
    int max_neighbors = 0;   // 0: 2 in one dimension, 2 * dim otherwise
};

struct HmcEntry {
    std::vector<double> point;
    std::vector<double> value;
};

class HmcDatabase {
public:
    HmcDatabase() = default;
    explicit HmcDatabase(HmcPolicy policy) : policy_(policy) {
        if (!(policy_.delta_reuse >= 0)) throw std::invalid_argument("delta_reuse must be nonnegative");
        if (policy_.max_neighbors < 0) throw std::invalid_argument("max_neighbors must be nonnegative");
    }

    const HmcPolicy& policy() const { return policy_; }
    const std::vector<HmcEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t dimension() const { return entries_.empty() ? 0 : entries_.front().point.size(); }

    int neighbor_limit() const {
        if (policy_.max_neighbors > 0) return policy_.max_neighbors;
        const auto d = static_cast<int>(dimension());
        return d <= 1 ? 2 : 2 * d;
    }

    /// Adds an entry; an existing point is an error unless `replace` is set.
    void insert(std::vector<double> point, std::vector<double> value, bool replace = false) {
        if (point.empty()) throw std::invalid_argument("query point must have at least one dimension");
        if (!entries_.empty()) {
            if (point.size() != dimension()) throw std::invalid_argument("query point dimension mismatch");
            if (value.size() != entries_.front().value.size()) throw std::invalid_argument("value dimension mismatch");
        }
        for (auto& e : entries_) {
            if (e.point == point) {
                if (!replace) throw std::invalid_argument("point already present in database");
                e.value = std::move(value);
                return;
            }
        }
        entries_.push_back({std::move(point), std::move(value)});
    }

private:
    HmcPolicy policy_;
    std::vector<HmcEntry> entries_;
};

struct HmcDecision {
    enum class Kind { Reuse, Interpolated, Launch };

    Kind kind = Kind::Launch;
    std::vector<double> value;
};

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline HmcDecision hmc_decide(const HmcDatabase& db, const std::vector<double>& query) {
    if (db.empty()) return {};
    if (query.size() != db.dimension()) throw std::invalid_argument("query dimension mismatch");
    const auto& entries = db.entries();

    std::vector<std::size_t> idx(entries.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> dist(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) dist[i] = distance(entries[i].point, query);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });

    if (dist[idx.front()] <= db.policy().delta_reuse) return {HmcDecision::Kind::Reuse, entries[idx.front()].value};
    if (db.policy().interpolation == Interpolation::None) return {};

    const auto k = std::min<std::size_t>(entries.size(), static_cast<std::size_t>(db.neighbor_limit()));
    if (query.size() == 1) {
        // nearest cached point on each side among the k nearest
        std::optional<std::size_t> lo, hi;
        for (std::size_t j = 0; j < k; ++j) {
            auto i = idx[j];
            double x = entries[i].point[0];
            if (x <= query[0] && (!lo || x > entries[*lo].point[0])) lo = i;
            if (x >= query[0] && (!hi || x < entries[*hi].point[0])) hi = i;
        }
        if (!lo || !hi) return {};
        const double x0 = entries[*lo].point[0], x1 = entries[*hi].point[0];
        const double w = x1 == x0 ? 0.0 : (query[0] - x0) / (x1 - x0);
        HmcDecision d{HmcDecision::Kind::Interpolated, entries[*lo].value};
        for (std::size_t q = 0; q < d.value.size(); ++q)
            d.value[q] = entries[*lo].value[q] + w * (entries[*hi].value[q] - entries[*lo].value[q]);
        return d;
    }

    // inverse-distance weighting over the k nearest, only inside their bounding box
    for (std::size_t dim = 0; dim < query.size(); ++dim) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t j = 0; j < k; ++j) {
            lo = std::min(lo, entries[idx[j]].point[dim]);
            hi = std::max(hi, entries[idx[j]].point[dim]);
        }
        if (query[dim] < lo || query[dim] > hi) return {};
    }
    HmcDecision d{HmcDecision::Kind::Interpolated, std::vector<double>(entries.front().value.size(), 0.0)};
    double wsum = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double w = 1.0 / (dist[idx[j]] * dist[idx[j]]);
        wsum += w;
        for (std::size_t q = 0; q < d.value.size(); ++q) d.value[q] += w * entries[idx[j]].value[q];
    }
    for (auto& v : d.value) v /= wsum;
    return d;
}

inline HmcDatabase hmc_insert(HmcDatabase db, std::vector<double> point, std::vector<double> value,
                              bool replace = false) {
    db.insert(std::move(point), std::move(value), replace);
    return db;
}

/// Anticipated points that would need a new microscale run, farthest from the
/// cache first, at most `budget` of them.
inline std::vector<std::vector<double>> hmc_precompute_candidates(const HmcDatabase& db,
                                                                  const std::vector<std::vector<double>>& anticipated,
                                                                  int budget) {
    if (budget < 0) throw std::invalid_argument("budget must be nonnegative");
    struct Cand {
        std::vector<double> point;
        double gap;
    };
    std::vector<Cand> cands;
    for (const auto& p : anticipated) {
        if (hmc_decide(db, p).kind != HmcDecision::Kind::Launch) continue;
        if (std::any_of(cands.begin(), cands.end(), [&](const Cand& c) { return c.point == p; })) continue;
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& e : db.entries()) gap = std::min(gap, distance(e.point, p));
        cands.push_back({p, gap});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.gap > b.gap; });
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < cands.size() && static_cast<int>(i) < budget; ++i) out.push_back(cands[i].point);
    return out;
}

}  // namespace mcp
