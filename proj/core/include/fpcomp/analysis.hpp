#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fpcomp/competition.hpp"
#include "fpcomp/duality2d.hpp"
#include "fpcomp/fpp.hpp"
#include "fpcomp/lattice.hpp"

namespace fpc {

/// Dense occupancy view of a competition run at time t.
struct OccupancySnapshot {
    Box box;
    double t = 0.0;
    std::vector<int8_t> species;  // per flat index: 0 unclaimed, 1, 2
    bool frame_touched = false;   // some occupied site lies on the frame

    int species_at_index(int64_t idx) const { return species[static_cast<size_t>(idx)]; }
    bool occupied_index(int64_t idx) const { return species[static_cast<size_t>(idx)] != 0; }
};

OccupancySnapshot snapshot_at(const CompetitionTrace& trace, double t);

// ---------------------------------------------------------------------------
// Shadow / Shade

struct ShadowQuery {
    Vec direction;  // unit l2 vector
    double t = 0.0;
    double radius = 0.0;  // R of Cyl_+(direction, R), based at the origin
};

enum class ShadowStatus {
    answered,
    frame_occupied,     // occupied set touches the frame inside the cylinder
    no_frame_access,    // cylinder misses the box frame entirely
};

struct ShadowResult {
    ShadowStatus status = ShadowStatus::answered;
    bool shadow = false;
};

/// Blocking set of a snapshot: the strong sites on the boundary of the
/// occupied region (external boundary in d=2, plain border otherwise).
/// Computed once per snapshot and shared across shadow queries.
struct BlockingSet {
    std::vector<uint8_t> blocked;  // dense over the box
};

BlockingSet compute_blocking(const OccupancySnapshot& snap);

/// Reusable stamped visited buffer for repeated shadow queries on one box.
struct ShadowWorkspace {
    std::vector<int32_t> stamp;
    int32_t counter = 0;
};

/// Does the blocking set disconnect the weak species from the frame
/// inside Cyl_+(direction, R)? BFS from the frame cells of the cylinder
/// over non-blocked cylinder sites; true iff no weak site is reached.
ShadowResult shadow(const OccupancySnapshot& snap, const BlockingSet& blocking,
                    const ShadowQuery& q, ShadowWorkspace& ws);
ShadowResult shadow(const OccupancySnapshot& snap, const BlockingSet& blocking,
                    const ShadowQuery& q);
ShadowResult shadow(const OccupancySnapshot& snap, const ShadowQuery& q);

struct ShadeReport {
    double t = 0.0;
    double shade_radius = 0.0;  // R_t: largest grid r shadowed in some direction
    int directions_tested = 0;
    std::optional<Vec> witness_direction;
    int64_t answered = 0;
    int64_t unanswerable = 0;
    double cover_epsilon = 0.0;
};

/// R_t over a direction cover and a descending radius grid, with early
/// exit at the first shadowed (direction, radius).
ShadeReport shade_radius(const OccupancySnapshot& snap, double cover_epsilon,
                         const std::vector<double>& r_grid);

// ---------------------------------------------------------------------------
// Density, sphere traces, fluctuations

struct DensityCurve {
    std::vector<double> t;        // ball radii
    std::vector<int64_t> strong;  // |eta2(inf) ∩ B(t)|
    std::vector<int64_t> ball;    // |B(t)| within the box
    std::vector<double> rho;      // strong/ball
    std::vector<uint8_t> clipped; // ball reaches the frame at this radius
    std::string norm_name;
};

/// Exact counts of the strong species inside balls of the given norm,
/// centered at the origin, over the final configuration.
DensityCurve density_curve(const CompetitionTrace& trace, const Norm& norm,
                           const std::vector<double>& t_grid);

/// Euclidean diameter of the strong species' unit cells meeting the
/// empirical sphere of radius t (annulus of half-width half the largest
/// cell diagonal in the shape norm). d = 2 only.
double sphere_trace_diameter(const CompetitionTrace& trace, const ShapeEstimate& shape, double t);

struct FluctuationGap {
    double t = 0.0;
    double inner_defect = 0.0;  // sup over unclaimed x of (t - ||x||)^+
    double outer_excess = 0.0;  // sup over claimed x of (||x|| - t)^+
    bool valid = false;         // false when the snapshot is boundary-clipped
};

FluctuationGap fluctuation_gap(const OccupancySnapshot& snap, const Norm& shape_norm);

// ---------------------------------------------------------------------------
// Power-law fits

struct ExponentFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    int used = 0;
    int dropped = 0;
};

/// Least-squares slope of log(value) against log(t); non-positive values
/// are dropped and counted. Requires >= 3 usable points.
ExponentFit fit_exponent(const std::vector<double>& t, const std::vector<double>& value);
ExponentFit fit_exponent(const DensityCurve& curve);

}  // namespace fpc
