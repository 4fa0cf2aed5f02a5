#include "fpcomp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace fpc {

OccupancySnapshot snapshot_at(const CompetitionTrace& trace, double t) {
    const Box& box = trace.box();
    OccupancySnapshot snap{box, t,
                           std::vector<int8_t>(static_cast<size_t>(box.site_count()), 0), false};
    const PathTime bound{t, std::numeric_limits<double>::infinity()};
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        const int sp = trace.species_at_index(idx);
        if (sp == 0 || bound < trace.claim_index(idx)) continue;
        snap.species[static_cast<size_t>(idx)] = static_cast<int8_t>(sp);
        if (box.on_frame(box.site_at(idx))) snap.frame_touched = true;
    }
    return snap;
}

BlockingSet compute_blocking(const OccupancySnapshot& snap) {
    const Box& box = snap.box;
    const size_t n = static_cast<size_t>(box.site_count());
    BlockingSet out{std::vector<uint8_t>(n, 0)};

    if (box.dim() == 2) {
        // External boundary: occupied sites adjacent to the complement
        // component that reaches the frame.
        std::vector<uint8_t> in_ext(n, 0);
        std::vector<int64_t> stack;
        for (int64_t idx = 0; idx < box.site_count(); ++idx) {
            if (!snap.occupied_index(idx) && box.on_frame(box.site_at(idx))) {
                in_ext[static_cast<size_t>(idx)] = 1;
                stack.push_back(idx);
            }
        }
        while (!stack.empty()) {
            const int64_t idx = stack.back();
            stack.pop_back();
            for (int axis = 0; axis < 2; ++axis) {
                for (int dir = -1; dir <= 1; dir += 2) {
                    const int64_t nidx = box.neighbor_index(idx, axis, dir);
                    if (nidx < 0) continue;
                    const size_t i = static_cast<size_t>(nidx);
                    if (snap.occupied_index(nidx) || in_ext[i]) continue;
                    in_ext[i] = 1;
                    stack.push_back(nidx);
                }
            }
        }
        for (int64_t idx = 0; idx < box.site_count(); ++idx) {
            if (snap.species_at_index(idx) != 2) continue;
            bool ext_neighbor = box.on_frame(box.site_at(idx));  // outside counts as complement
            for (int axis = 0; axis < 2 && !ext_neighbor; ++axis) {
                for (int dir = -1; dir <= 1; dir += 2) {
                    const int64_t nidx = box.neighbor_index(idx, axis, dir);
                    if (nidx >= 0 && in_ext[static_cast<size_t>(nidx)]) {
                        ext_neighbor = true;
                        break;
                    }
                }
            }
            if (ext_neighbor) out.blocked[static_cast<size_t>(idx)] = 1;
        }
        return out;
    }

    // General d: strong sites with an unoccupied neighbor (sites beyond
    // the frame count as unoccupied).
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        if (snap.species_at_index(idx) != 2) continue;
        bool border = box.on_frame(box.site_at(idx));
        for (int axis = 0; axis < box.dim() && !border; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int64_t nidx = box.neighbor_index(idx, axis, dir);
                if (nidx >= 0 && !snap.occupied_index(nidx)) {
                    border = true;
                    break;
                }
            }
        }
        if (border) out.blocked[static_cast<size_t>(idx)] = 1;
    }
    return out;
}

ShadowResult shadow(const OccupancySnapshot& snap, const BlockingSet& blocking,
                    const ShadowQuery& q, ShadowWorkspace& ws) {
    const Box& box = snap.box;
    const int d = box.dim();
    const Cylinder cyl = Cylinder::half(Vec(d, 0.0), q.direction, q.radius);

    if (ws.stamp.size() != static_cast<size_t>(box.site_count())) {
        ws.stamp.assign(static_cast<size_t>(box.site_count()), 0);
        ws.counter = 0;
    }
    const int32_t mark = ++ws.counter;
    auto visited = [&](int64_t idx) { return ws.stamp[static_cast<size_t>(idx)] == mark; };
    auto visit = [&](int64_t idx) { ws.stamp[static_cast<size_t>(idx)] = mark; };

    ShadowResult res;
    std::deque<int64_t> queue;

    // Seed from the frame cells of the cylinder; reject the query if the
    // occupied set touches the frame inside it (its exterior is unknown).
    bool frame_cell_found = false;
    bool frame_occupied = false;
    box.for_each_frame_site([&](const Site& s) {
        if (frame_occupied || !cylinder_contains(s, cyl)) return;
        frame_cell_found = true;
        const int64_t idx = box.index_of(s);
        if (snap.occupied_index(idx)) {
            frame_occupied = true;
            return;
        }
        if (!visited(idx)) {
            visit(idx);
            queue.push_back(idx);
        }
    });
    if (frame_occupied) {
        res.status = ShadowStatus::frame_occupied;
        return res;
    }
    if (!frame_cell_found) {
        res.status = ShadowStatus::no_frame_access;
        return res;
    }

    while (!queue.empty()) {
        const int64_t idx = queue.front();
        queue.pop_front();
        if (snap.species_at_index(idx) == 1) {
            res.shadow = false;
            return res;
        }
        const Site here = box.site_at(idx);
        for (int axis = 0; axis < d; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int64_t nidx = box.neighbor_index(idx, axis, dir);
                if (nidx < 0) continue;
                if (visited(nidx) || blocking.blocked[static_cast<size_t>(nidx)]) continue;
                if (!cylinder_contains(here.shifted(axis, dir), cyl)) continue;
                visit(nidx);
                queue.push_back(nidx);
            }
        }
    }
    res.shadow = true;  // no weak site reachable from the frame inside the cylinder
    return res;
}

ShadowResult shadow(const OccupancySnapshot& snap, const BlockingSet& blocking,
                    const ShadowQuery& q) {
    ShadowWorkspace ws;
    return shadow(snap, blocking, q, ws);
}

ShadowResult shadow(const OccupancySnapshot& snap, const ShadowQuery& q) {
    ShadowWorkspace ws;
    return shadow(snap, compute_blocking(snap), q, ws);
}

ShadeReport shade_radius(const OccupancySnapshot& snap, double cover_epsilon,
                         const std::vector<double>& r_grid) {
    if (!std::is_sorted(r_grid.begin(), r_grid.end()))
        throw std::invalid_argument("shade_radius: r_grid must be increasing");
    const SphereCover cover = sphere_cover(cover_epsilon, make_norm_l2(), snap.box.dim());
    const BlockingSet blocking = compute_blocking(snap);

    ShadeReport report;
    report.t = snap.t;
    report.directions_tested = static_cast<int>(cover.centers.size());
    report.cover_epsilon = cover_epsilon;

    ShadowWorkspace ws;
    for (auto it = r_grid.rbegin(); it != r_grid.rend(); ++it) {
        for (const Vec& dir : cover.centers) {
            const ShadowResult res = shadow(snap, blocking, ShadowQuery{dir, snap.t, *it}, ws);
            if (res.status != ShadowStatus::answered) {
                ++report.unanswerable;
                continue;
            }
            ++report.answered;
            if (res.shadow) {
                report.shade_radius = *it;
                report.witness_direction = dir;
                return report;
            }
        }
    }
    report.shade_radius = 0.0;
    return report;
}

DensityCurve density_curve(const CompetitionTrace& trace, const Norm& norm,
                           const std::vector<double>& t_grid) {
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("density_curve: t_grid must be increasing");
    const Box& box = trace.box();
    DensityCurve curve;
    curve.t = t_grid;
    curve.norm_name = norm.name;
    curve.strong.assign(t_grid.size(), 0);
    curve.ball.assign(t_grid.size(), 0);

    // Bucket each site at the smallest radius containing it, then
    // prefix-sum: counts are exact and the pass is linear.
    std::vector<int64_t> ball_first(t_grid.size() + 1, 0), strong_first(t_grid.size() + 1, 0);
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        const double v = norm(box.site_at(idx));
        const auto it = std::lower_bound(curve.t.begin(), curve.t.end(), v);
        const size_t first = static_cast<size_t>(it - curve.t.begin());
        ++ball_first[first];
        if (trace.species_at_index(idx) == 2) ++strong_first[first];
    }
    int64_t ball_acc = 0, strong_acc = 0;
    for (size_t k = 0; k < curve.t.size(); ++k) {
        ball_acc += ball_first[k];
        strong_acc += strong_first[k];
        curve.ball[k] = ball_acc;
        curve.strong[k] = strong_acc;
    }
    double min_frame_norm = std::numeric_limits<double>::infinity();
    box.for_each_frame_site(
        [&](const Site& s) { min_frame_norm = std::min(min_frame_norm, norm(s)); });
    for (size_t k = 0; k < curve.t.size(); ++k) {
        curve.rho.push_back(curve.ball[k] > 0
                                ? static_cast<double>(curve.strong[k]) /
                                      static_cast<double>(curve.ball[k])
                                : 0.0);
        curve.clipped.push_back(curve.t[k] >= min_frame_norm ? 1 : 0);
    }
    return curve;
}

namespace {

// Convex hull (monotone chain) of integer points; the cell-aware
// diameter objective is convex in each argument, so hull vertices attain it.
std::vector<Site> convex_hull(std::vector<Site> pts) {
    std::sort(pts.begin(), pts.end(), [](const Site& a, const Site& b) {
        return a.c[0] != b.c[0] ? a.c[0] < b.c[0] : a.c[1] < b.c[1];
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    auto cross = [](const Site& o, const Site& a, const Site& b) {
        return static_cast<int64_t>(a.c[0] - o.c[0]) * (b.c[1] - o.c[1]) -
               static_cast<int64_t>(a.c[1] - o.c[1]) * (b.c[0] - o.c[0]);
    };
    std::vector<Site> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace

double sphere_trace_diameter(const CompetitionTrace& trace, const ShapeEstimate& shape,
                             double t) {
    const Box& box = trace.box();
    if (box.dim() != 2)
        throw std::invalid_argument("sphere_trace_diameter: defined for d = 2");
    const Norm norm = shape.norm();
    // Annulus half-width: half the largest cell diagonal in the shape norm.
    double w = 0.0;
    for (const double sx : {-1.0, 1.0}) {
        const std::array<double, 2> diag{sx, 1.0};
        w = std::max(w, 0.5 * norm(std::span<const double>(diag.data(), 2)));
    }

    std::vector<Site> on_sphere;
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        if (trace.species_at_index(idx) != 2) continue;
        const Site s = box.site_at(idx);
        const double v = norm(s);
        if (v >= t - w && v <= t + w) on_sphere.push_back(s);
    }
    if (on_sphere.empty()) return 0.0;

    const std::vector<Site> hull = convex_hull(std::move(on_sphere));
    double best = 0.0;
    for (size_t i = 0; i < hull.size(); ++i) {
        for (size_t j = i; j < hull.size(); ++j) {
            const double dx = std::abs(static_cast<double>(hull[i].c[0] - hull[j].c[0])) + 1.0;
            const double dy = std::abs(static_cast<double>(hull[i].c[1] - hull[j].c[1])) + 1.0;
            best = std::max(best, std::sqrt(dx * dx + dy * dy));
        }
    }
    return best;
}

FluctuationGap fluctuation_gap(const OccupancySnapshot& snap, const Norm& shape_norm) {
    FluctuationGap gap;
    gap.t = snap.t;
    if (snap.frame_touched) {
        gap.valid = false;  // clipped snapshot: the gap to the true shape is unknowable
        return gap;
    }
    const Box& box = snap.box;
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        const double v = shape_norm(box.site_at(idx));
        if (snap.occupied_index(idx)) {
            gap.outer_excess = std::max(gap.outer_excess, v - snap.t);
        } else {
            gap.inner_defect = std::max(gap.inner_defect, snap.t - v);
        }
    }
    gap.inner_defect = std::max(gap.inner_defect, 0.0);
    gap.outer_excess = std::max(gap.outer_excess, 0.0);
    gap.valid = true;
    return gap;
}

ExponentFit fit_exponent(const std::vector<double>& t, const std::vector<double>& value) {
    if (t.size() != value.size()) throw std::invalid_argument("fit_exponent: length mismatch");
    ExponentFit fit;
    std::vector<double> x, y;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] > 0.0 && value[i] > 0.0) {
            x.push_back(std::log(t[i]));
            y.push_back(std::log(value[i]));
        } else {
            ++fit.dropped;
        }
    }
    fit.used = static_cast<int>(x.size());
    if (fit.used < 3) throw std::invalid_argument("fit_exponent: fewer than 3 usable points");

    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_exponent: degenerate abscissae");
    fit.slope = sxy / sxx;
    double rss = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - my - fit.slope * (x[i] - mx);
        rss += r * r;
    }
    if (x.size() > 2) fit.stderr_slope = std::sqrt(rss / (n - 2.0) / sxx);
    return fit;
}

ExponentFit fit_exponent(const DensityCurve& curve) {
    std::vector<double> t, v;
    for (size_t i = 0; i < curve.t.size(); ++i) {
        if (!curve.clipped[i]) {
            t.push_back(curve.t[i]);
            v.push_back(curve.rho[i]);
        }
    }
    return fit_exponent(t, v);
}

}  // namespace fpc
