#include "fpcomp/fpp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <queue>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace fpc {

FppField::FppField(Box box, Site source)
    : box_(box),
      source_(source),
      time_(static_cast<size_t>(box.site_count()), PathTime::infinite()),
      parent_(static_cast<size_t>(box.site_count()), int8_t{-1}),
      finalized_(static_cast<size_t>(box.site_count()), uint8_t{0}) {}

bool FppField::reached(const Site& y) const {
    return box_.contains(y) && finalized_[static_cast<size_t>(box_.index_of(y))] != 0;
}

double FppField::time_of(const Site& y) const {
    return time_exact(y).value();
}

PathTime FppField::time_exact(const Site& y) const {
    if (!reached(y)) return PathTime::infinite();
    return time_[static_cast<size_t>(box_.index_of(y))];
}

int64_t FppField::parent_index(int64_t idx) const {
    const int8_t code = parent_[static_cast<size_t>(idx)];
    if (code < 0) return -1;
    return box_.neighbor_index(idx, code >> 1, (code & 1) ? -1 : +1);
}

namespace {

struct QueueEntry {
    PathTime t;
    int64_t idx;
};

// Min-heap order: smallest (time, lexicographic site) first. Flat indices
// increase lexicographically, so idx order is site order.
struct QueueCmp {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.t != b.t) return b.t < a.t;
        return b.idx < a.idx;
    }
};

}  // namespace

FppField grow_ball(const Site& source, const EdgeWeightSource& weights, const Box& box,
                   std::optional<double> t_max, std::optional<Site> stop_site) {
    if (!box.contains(source)) throw std::invalid_argument("grow_ball: source outside box");
    FppField f(box, source);
    f.t_max_ = t_max;

    const int d = box.dim();
    const int64_t stop_idx = stop_site ? box.index_of(*stop_site) : -1;
    const PathTime horizon =
        t_max ? PathTime{*t_max, std::numeric_limits<double>::infinity()} : PathTime::infinite();
    // horizon.lo = +inf makes the bound inclusive: t <= t_max passes.

    std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueCmp> queue;
    const int64_t src_idx = box.index_of(source);
    f.time_[static_cast<size_t>(src_idx)] = PathTime::zero();
    queue.push({PathTime::zero(), src_idx});

    while (!queue.empty()) {
        const QueueEntry top = queue.top();
        queue.pop();
        auto& best = f.time_[static_cast<size_t>(top.idx)];
        if (f.finalized_[static_cast<size_t>(top.idx)]) continue;
        if (top.t != best) continue;  // stale entry
        if (horizon < top.t) break;
        f.finalized_[static_cast<size_t>(top.idx)] = 1;
        ++f.finalized_count_;
        const Site here = box.site_at(top.idx);
        if (box.on_frame(here)) f.boundary_clipped_ = true;
        if (top.idx == stop_idx) break;

        for (int axis = 0; axis < d; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int64_t nidx = box.neighbor_index(top.idx, axis, dir);
                if (nidx < 0 || f.finalized_[static_cast<size_t>(nidx)]) continue;
                const Site there = here.shifted(axis, dir);
                const double w = weights(edge_between(here, there));
                const PathTime cand = path_add(top.t, w);
                auto& slot = f.time_[static_cast<size_t>(nidx)];
                if (cand < slot) {
                    slot = cand;
                    f.parent_[static_cast<size_t>(nidx)] =
                        static_cast<int8_t>(axis * 2 + (dir < 0 ? 1 : 0));
                    queue.push({cand, nidx});
                }
            }
        }
    }
    return f;
}

double travel_time(const FppField& f, const Site& y) { return f.time_of(y); }

std::optional<Site> certificate_violation(const FppField& f, const EdgeWeightSource& weights) {
    const Box& box = f.box();
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        if (!f.reached_index(idx)) continue;
        const int64_t pidx = f.parent_index(idx);
        if (pidx < 0) {
            if (!(f.time_index(idx) == PathTime::zero())) return box.site_at(idx);
            continue;
        }
        if (!f.reached_index(pidx)) return box.site_at(idx);
        const Site x = box.site_at(idx);
        const Site p = box.site_at(pidx);
        const double w = weights(edge_between(p, x));
        if (!(path_add(f.time_index(pidx), w) == f.time_index(idx))) return x;
        if (f.time_index(idx) < f.time_index(pidx)) return x;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

CrossingResult cylinder_crossing_time(const Vec& z, const Vec& axis_unit, double h, double r,
                                      const EdgeWeightSource& weights) {
    const int d = static_cast<int>(axis_unit.size());
    const Cylinder cyl = Cylinder::segment(z, axis_unit, r, h);

    // Integer bounding box of the cylinder.
    std::array<int32_t, kMaxDim> lo{}, hi{};
    for (int i = 0; i < d; ++i) {
        const double c0 = z[i];
        const double c1 = z[i] + h * axis_unit[i];
        lo[i] = static_cast<int32_t>(std::floor(std::min(c0, c1) - r - 1.0));
        hi[i] = static_cast<int32_t>(std::ceil(std::max(c0, c1) + r + 1.0));
    }

    std::vector<Site> sites;
    std::unordered_map<Site, int32_t, SiteHash> index;
    {
        Site cur = Site::zero(d);
        for (int i = 0; i < d; ++i) cur.c[i] = lo[i];
        while (true) {
            if (cylinder_contains(cur, cyl)) {
                index.emplace(cur, static_cast<int32_t>(sites.size()));
                sites.push_back(cur);
            }
            int k = d - 1;
            while (k >= 0) {
                if (++cur.c[k] <= hi[k]) break;
                cur.c[k] = lo[k];
                --k;
            }
            if (k < 0) break;
        }
    }
    if (sites.empty())
        throw std::invalid_argument("cylinder_crossing_time: cylinder contains no integer points");

    auto nearest = [&](const Vec& target) {
        int32_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < sites.size(); ++i) {
            double d2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = sites[i].c[k] - target[k];
                d2 += diff * diff;
            }
            if (d2 < best_d2 - 1e-12 ||
                (std::abs(d2 - best_d2) <= 1e-12 && sites[i] < sites[best])) {
                best_d2 = d2;
                best = static_cast<int32_t>(i);
            }
        }
        return best;
    };
    Vec top(d);
    for (int i = 0; i < d; ++i) top[i] = z[i] + h * axis_unit[i];
    const int32_t s0 = nearest(z);
    const int32_t sf = nearest(top);

    // Dijkstra restricted to the enumerated sites.
    struct Entry {
        PathTime t;
        int32_t i;
    };
    struct Cmp {
        const std::vector<Site>* sites;
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.t != b.t) return b.t < a.t;
            return (*sites)[b.i] < (*sites)[a.i];
        }
    };
    std::vector<PathTime> best(sites.size(), PathTime::infinite());
    std::vector<uint8_t> done(sites.size(), 0);
    std::priority_queue<Entry, std::vector<Entry>, Cmp> queue(Cmp{&sites});
    best[s0] = PathTime::zero();
    queue.push({PathTime::zero(), s0});
    while (!queue.empty()) {
        const Entry top_e = queue.top();
        queue.pop();
        if (done[top_e.i] || top_e.t != best[top_e.i]) continue;
        done[top_e.i] = 1;
        if (top_e.i == sf) break;
        const Site& here = sites[top_e.i];
        for (const Site& there : neighbors(here)) {
            const auto it = index.find(there);
            if (it == index.end() || done[it->second]) continue;
            const PathTime cand = path_add(top_e.t, weights(edge_between(here, there)));
            if (cand < best[it->second]) {
                best[it->second] = cand;
                queue.push({cand, it->second});
            }
        }
    }

    CrossingResult res;
    res.entry = sites[s0];
    res.exit = sites[sf];
    res.cylinder_sites = static_cast<int64_t>(sites.size());
    res.disconnected = !done[sf];
    res.time_exact = res.disconnected ? PathTime::infinite() : best[sf];
    res.time = res.time_exact.value();
    return res;
}

// ---------------------------------------------------------------------------

namespace {

// Two-sided 97.5% Student t quantiles for small degrees of freedom.
double t_quantile_975(int df) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                       2.306,  2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
                                       2.131,  2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
                                       2.074,  2.069, 2.064, 2.060, 2.056, 2.052, 2.048,
                                       2.045,  2.042};
    if (df < 1) return 0.0;
    if (df <= 30) return table[df - 1];
    return 1.96;
}

Site round_target(const Vec& direction, int n, int d) {
    Site s = Site::zero(d);
    for (int i = 0; i < d; ++i) s.c[i] = static_cast<int32_t>(std::llround(direction[i] * n));
    return s;
}

}  // namespace

TimeConstantEstimate estimate_time_constant(const PassageLaw& law, const Vec& direction,
                                            const std::vector<int>& ladder, int replicas,
                                            const ReplicaSeedPolicy& seeds, int d) {
    if (ladder.empty() || !std::is_sorted(ladder.begin(), ladder.end()))
        throw std::invalid_argument("estimate_time_constant: ladder must be increasing");
    if (replicas < 2) throw std::invalid_argument("estimate_time_constant: replicas >= 2");

    TimeConstantEstimate est;
    est.direction = direction;
    est.ladder = ladder;
    est.replicas = replicas;

    const int n_max = ladder.back();
    int32_t reach = 0;
    for (int i = 0; i < d; ++i)
        reach = std::max(reach, static_cast<int32_t>(std::ceil(std::abs(direction[i]) * n_max)));
    const Box box(d, reach + std::max<int32_t>(20, reach / 4));

    std::vector<std::vector<double>> mu_rung(ladder.size());
    for (int rep = 0; rep < replicas; ++rep) {
        const EdgeWeightSource weights{EdgeSeedField(seeds.seed_for(rep)), law, 0};
        // One growth reaches all rungs: stop at the farthest target.
        const Site far_target = round_target(direction, n_max, d);
        const FppField field = grow_ball(Site::zero(d), weights, box, std::nullopt, far_target);
        bool ok = true;
        for (size_t k = 0; k < ladder.size(); ++k) {
            const Site target = round_target(direction, ladder[k], d);
            const double t = travel_time(field, target);
            if (!std::isfinite(t)) {
                ok = false;
                continue;
            }
            mu_rung[k].push_back(t / norm_l2(to_vec(target)));
        }
        if (!ok) ++est.discarded;
    }

    for (size_t k = 0; k < ladder.size(); ++k) {
        double m = 0.0;
        for (double v : mu_rung[k]) m += v;
        est.mu_by_rung.push_back(mu_rung[k].empty() ? 0.0 : m / mu_rung[k].size());
    }
    est.replica_mu = mu_rung.back();
    const size_t nrep = est.replica_mu.size();
    if (nrep < 2) throw std::runtime_error("estimate_time_constant: fewer than 2 usable replicas");
    double mean = 0.0;
    for (double v : est.replica_mu) mean += v;
    mean /= static_cast<double>(nrep);
    double var = 0.0;
    for (double v : est.replica_mu) var += (v - mean) * (v - mean);
    var /= static_cast<double>(nrep - 1);
    est.mu_hat = mean;
    est.std_error = std::sqrt(var / static_cast<double>(nrep));
    est.ci_halfwidth = t_quantile_975(static_cast<int>(nrep) - 1) * est.std_error;
    return est;
}

size_t ShapeEstimate::nearest_direction(std::span<const double> unit) const {
    size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < directions.size(); ++i) {
        double d2 = 0.0;
        for (size_t k = 0; k < unit.size(); ++k) {
            const double diff = unit[k] - directions[i][k];
            d2 += diff * diff;
        }
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

Norm ShapeEstimate::norm() const {
    auto self = *this;  // value capture keeps the handle self-contained
    return Norm{"fpp:" + law.describe(), [self](std::span<const double> v) {
                    const double r = norm_l2(v);
                    if (r == 0.0) return 0.0;
                    std::array<double, kMaxDim> unit{};
                    for (size_t i = 0; i < v.size(); ++i) unit[i] = v[i] / r;
                    const size_t k =
                        self.nearest_direction(std::span<const double>(unit.data(), v.size()));
                    return r * self.mu_hat[k];
                }};
}

bool ShapeEstimate::ball_contains(const Site& x, double t) const {
    return norm()(x) <= t;
}

ShapeEstimate estimate_shape(const PassageLaw& law, double epsilon_cover,
                             const std::vector<int>& ladder, int replicas,
                             const ReplicaSeedPolicy& seeds, int d, int workers) {
    const SphereCover cover = sphere_cover(epsilon_cover, make_norm_l2(), d);
    ShapeEstimate shape;
    shape.law = law;
    shape.directions = cover.centers;
    shape.ladder = ladder;
    shape.replicas = replicas;
    shape.base_seed = seeds.base_seed;
    shape.cover_epsilon = epsilon_cover;
    shape.mu_hat.resize(cover.centers.size());
    shape.ci_halfwidth.resize(cover.centers.size());
    shape.std_error.resize(cover.centers.size());

    std::atomic<size_t> next{0};
    auto work = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cover.centers.size()) break;
            // Decorrelate directions by offsetting the seed block.
            const ReplicaSeedPolicy dir_seeds{seeds.base_seed +
                                              0x10000ull * static_cast<uint64_t>(i)};
            const TimeConstantEstimate est =
                estimate_time_constant(law, cover.centers[i], ladder, replicas, dir_seeds, d);
            shape.mu_hat[i] = est.mu_hat;
            shape.ci_halfwidth[i] = est.ci_halfwidth;
            shape.std_error[i] = est.std_error;
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return shape;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json law_to_json(const PassageLaw& law) {
    nlohmann::json j;
    switch (law.family) {
        case LawFamily::Exponential:
            j["family"] = "exponential";
            j["rate"] = law.p0;
            break;
        case LawFamily::Uniform:
            j["family"] = "uniform";
            j["a"] = law.p0;
            j["b"] = law.p1;
            break;
        case LawFamily::ShiftedExponential:
            j["family"] = "shifted_exponential";
            j["shift"] = law.p0;
            j["rate"] = law.p1;
            break;
        case LawFamily::Deterministic:
            j["family"] = "deterministic";
            j["value"] = law.p0;
            break;
    }
    return j;
}

PassageLaw law_from_json(const nlohmann::json& j) {
    auto num = [&](const char* key) {
        const auto& v = j.at(key);
        return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>();
    };
    const std::string family = j.at("family").get<std::string>();
    PassageLaw law;
    if (family == "exponential") {
        law = PassageLaw::exponential(num("rate"));
    } else if (family == "uniform") {
        law = PassageLaw::uniform(num("a"), num("b"));
    } else if (family == "shifted_exponential") {
        law = PassageLaw::shifted_exponential(num("shift"), num("rate"));
    } else if (family == "deterministic") {
        law = PassageLaw::deterministic(num("value"));
    } else {
        throw std::invalid_argument("unknown law family: " + family);
    }
    law.tag = j.dump();
    return law;
}

}  // namespace

std::string shape_to_json(const ShapeEstimate& s) {
    nlohmann::json j;
    j["schema"] = "fpcomp.shape.v1";
    j["law"] = law_to_json(s.law);
    j["directions"] = s.directions;
    j["mu_hat"] = s.mu_hat;
    j["ci_halfwidth"] = s.ci_halfwidth;
    j["std_error"] = s.std_error;
    j["ladder"] = s.ladder;
    j["replicas"] = s.replicas;
    j["base_seed"] = s.base_seed;
    j["cover_epsilon"] = s.cover_epsilon;
    return j.dump(2);
}

ShapeEstimate shape_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ShapeEstimate s;
    s.law = law_from_json(j.at("law"));
    s.directions = j.at("directions").get<std::vector<Vec>>();
    s.mu_hat = j.at("mu_hat").get<std::vector<double>>();
    s.ci_halfwidth = j.at("ci_halfwidth").get<std::vector<double>>();
    s.std_error = j.value("std_error", std::vector<double>(s.mu_hat.size(), 0.0));
    s.ladder = j.at("ladder").get<std::vector<int>>();
    s.replicas = j.at("replicas").get<int>();
    s.base_seed = j.at("base_seed").get<uint64_t>();
    s.cover_epsilon = j.at("cover_epsilon").get<double>();
    return s;
}

}  // namespace fpc
