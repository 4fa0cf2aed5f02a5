#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpcomp/lattice.hpp"
#include "fpcomp/passage.hpp"
#include "fpcomp/pathtime.hpp"

namespace fpc {

/// Per-edge weights for one growth: a law read through one stream of a
/// seed field. Pure; evaluation order never matters.
struct EdgeWeightSource {
    EdgeSeedField field;
    PassageLaw law;
    uint32_t stream = 0;

    double operator()(const Edge& e) const {
        return quantile(law, field.uniform(e, stream));
    }
};

/// First-passage field grown from one source: infection time of every
/// finalized site, with the shortest-path-tree parent retained as the
/// optimality certificate.
class FppField {
public:
    FppField(Box box, Site source);

    const Box& box() const { return box_; }
    const Site& source() const { return source_; }

    bool reached(const Site& y) const;
    /// Published infection time, +inf when unreached/not finalized.
    double time_of(const Site& y) const;
    /// Full-precision infection time.
    PathTime time_exact(const Site& y) const;

    bool boundary_clipped() const { return boundary_clipped_; }
    std::optional<double> t_max() const { return t_max_; }

    // Flat-index accessors for exhaustive scans.
    bool reached_index(int64_t idx) const { return finalized_[static_cast<size_t>(idx)] != 0; }
    const PathTime& time_index(int64_t idx) const { return time_[static_cast<size_t>(idx)]; }
    /// Parent encoding: axis*2 + (dir<0), or -1 for the source.
    int8_t parent_code(int64_t idx) const { return parent_[static_cast<size_t>(idx)]; }
    int64_t parent_index(int64_t idx) const;

    int64_t finalized_count() const { return finalized_count_; }

private:
    friend FppField grow_ball(const Site&, const EdgeWeightSource&, const Box&,
                              std::optional<double>, std::optional<Site>);
    Box box_;
    Site source_;
    std::vector<PathTime> time_;
    std::vector<int8_t> parent_;
    std::vector<uint8_t> finalized_;
    int64_t finalized_count_ = 0;
    bool boundary_clipped_ = false;
    std::optional<double> t_max_;
};

/// Dijkstra growth from `source`, lazily generating edge times from the
/// weight source. Finalizes every site with time <= t_max (the whole box
/// when absent); stops early once `stop_site` is finalized.
FppField grow_ball(const Site& source, const EdgeWeightSource& weights, const Box& box,
                   std::optional<double> t_max = std::nullopt,
                   std::optional<Site> stop_site = std::nullopt);

/// time_of(y), +inf sentinel when unreached.
double travel_time(const FppField& f, const Site& y);

/// Verifies the shortest-path-tree recurrence time(x) == time(parent) + w
/// exactly (full-precision equality) for every finalized site; returns
/// the first failing site if any.
std::optional<Site> certificate_violation(const FppField& f, const EdgeWeightSource& weights);

// ---------------------------------------------------------------------------
// Restricted cylinder crossing

struct CrossingResult {
    Site entry;   // s0: integer point of the cylinder nearest to z
    Site exit;    // s_f: nearest to z + h*axis
    PathTime time_exact;
    double time = 0.0;          // +inf when disconnected inside the cylinder
    bool disconnected = false;
    int64_t cylinder_sites = 0;
};

/// Minimal time to cross Cyl_z(axis, r, h) from s0 to s_f using only
/// edges with both endpoints in the cylinder. Throws when the cylinder
/// contains no integer points.
CrossingResult cylinder_crossing_time(const Vec& z, const Vec& axis_unit, double h, double r,
                                      const EdgeWeightSource& weights);

// ---------------------------------------------------------------------------
// Time constants and empirical shape

struct ReplicaSeedPolicy {
    uint64_t base_seed = 0;
    uint64_t seed_for(int replica) const { return base_seed + static_cast<uint64_t>(replica); }
};

struct TimeConstantEstimate {
    Vec direction;
    double mu_hat = 0.0;       // time per unit Euclidean length, largest ladder rung
    double ci_halfwidth = 0.0; // 95% t-interval over replicas
    double std_error = 0.0;    // standard error of mu_hat
    std::vector<int> ladder;
    std::vector<double> mu_by_rung;  // replica means per rung
    std::vector<double> replica_mu;  // per replica at the largest rung
    int replicas = 0;
    int discarded = 0;
};

TimeConstantEstimate estimate_time_constant(const PassageLaw& law, const Vec& direction,
                                            const std::vector<int>& ladder, int replicas,
                                            const ReplicaSeedPolicy& seeds, int d);

/// Empirical directional time constants over a sphere cover; induces the
/// positively homogeneous norm ||x|| = ||x||_2 * mu_hat(x/||x||_2).
struct ShapeEstimate {
    PassageLaw law;
    std::vector<Vec> directions;
    std::vector<double> mu_hat;
    std::vector<double> ci_halfwidth;
    std::vector<double> std_error;
    std::vector<int> ladder;
    int replicas = 0;
    uint64_t base_seed = 0;
    double cover_epsilon = 0.0;

    size_t nearest_direction(std::span<const double> unit) const;
    Norm norm() const;
    /// Ball membership test for B(t) under the induced norm.
    bool ball_contains(const Site& x, double t) const;
};

ShapeEstimate estimate_shape(const PassageLaw& law, double epsilon_cover,
                             const std::vector<int>& ladder, int replicas,
                             const ReplicaSeedPolicy& seeds, int d, int workers = 1);

std::string shape_to_json(const ShapeEstimate& s);
ShapeEstimate shape_from_json(const std::string& text);

}  // namespace fpc
