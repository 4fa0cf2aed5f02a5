#include "fpcomp/competition.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <queue>

namespace fpc {

CompetitionConfig CompetitionConfig::two_sources(int d, int32_t box_radius) {
    CompetitionConfig cfg;
    cfg.d = d;
    cfg.box_radius = box_radius;
    cfg.s1 = Site::zero(d);
    cfg.s2 = Site::zero(d).shifted(0, 1);
    cfg.law1 = PassageLaw::exponential(1.0);
    cfg.law2 = PassageLaw::exponential(1.5);
    return cfg;
}

void CompetitionConfig::validate() const {
    const Box box(d, box_radius);
    if (s1 == s2) throw std::invalid_argument("competition: sources must be distinct");
    if (s1.dim != d || s2.dim != d)
        throw std::invalid_argument("competition: source dimension mismatch");
    if (!box.contains(s1) || !box.contains(s2))
        throw std::invalid_argument("competition: sources must lie in the box");
}

CompetitionTrace::CompetitionTrace(const CompetitionConfig& cfg, Box box)
    : cfg_(cfg),
      box_(box),
      species_(static_cast<size_t>(box.site_count()), int8_t{0}),
      claim_(static_cast<size_t>(box.site_count()), PathTime::infinite()),
      parent_(static_cast<size_t>(box.site_count()), int8_t{-1}) {}

int CompetitionTrace::species_at(const Site& x) const {
    if (!box_.contains(x)) return 0;
    return species_[static_cast<size_t>(box_.index_of(x))];
}

double CompetitionTrace::claim_time(const Site& x) const { return claim_exact(x).value(); }

PathTime CompetitionTrace::claim_exact(const Site& x) const {
    if (!box_.contains(x)) return PathTime::infinite();
    const int64_t idx = box_.index_of(x);
    if (species_[static_cast<size_t>(idx)] == 0) return PathTime::infinite();
    return claim_[static_cast<size_t>(idx)];
}

int64_t CompetitionTrace::parent_index(int64_t idx) const {
    const int8_t code = parent_[static_cast<size_t>(idx)];
    if (code < 0) return -1;
    return box_.neighbor_index(idx, code >> 1, (code & 1) ? -1 : +1);
}

std::pair<std::vector<Site>, std::vector<Site>> CompetitionTrace::snapshot(double t) const {
    std::pair<std::vector<Site>, std::vector<Site>> out;
    const PathTime bound{t, std::numeric_limits<double>::infinity()};
    for (int64_t idx = 0; idx < box_.site_count(); ++idx) {
        const int sp = species_[static_cast<size_t>(idx)];
        if (sp == 0) continue;
        if (bound < claim_[static_cast<size_t>(idx)]) continue;
        (sp == 1 ? out.first : out.second).push_back(box_.site_at(idx));
    }
    return out;
}

std::pair<int64_t, int64_t> CompetitionTrace::counts_at(double t) const {
    int64_t n1 = 0, n2 = 0;
    const PathTime bound{t, std::numeric_limits<double>::infinity()};
    for (int64_t idx = 0; idx < box_.site_count(); ++idx) {
        const int sp = species_[static_cast<size_t>(idx)];
        if (sp == 0 || bound < claim_[static_cast<size_t>(idx)]) continue;
        (sp == 1 ? n1 : n2) += 1;
    }
    return {n1, n2};
}

std::vector<double> CompetitionTrace::event_times() const {
    std::vector<double> out;
    out.reserve(events_.size());
    for (const auto& e : events_) {
        if (out.empty() || out.back() != e.t.value()) out.push_back(e.t.value());
    }
    return out;
}

std::string CompetitionTrace::export_jsonl() const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"schema\":\"fpcomp.trace.v1\",\"d\":%d,\"L\":%d,\"seed\":%" PRIu64
                  ",\"law1\":\"%s\",\"law2\":\"%s\",\"mode\":\"%s\",\"events\":%zu,"
                  "\"ties\":%" PRId64 "}\n",
                  cfg_.d, cfg_.box_radius, cfg_.master_seed, cfg_.law1.describe().c_str(),
                  cfg_.law2.describe().c_str(),
                  cfg_.mode == CouplingMode::SharedUniform ? "shared" : "independent",
                  events_.size(), tie_count_);
    out += buf;
    for (const auto& e : events_) {
        const Site s = box_.site_at(e.site);
        std::string coords = "[";
        for (int i = 0; i < s.dim; ++i) {
            coords += std::to_string(s.c[i]);
            if (i + 1 < s.dim) coords += ",";
        }
        coords += "]";
        std::string pcoords = "null";
        if (e.parent >= 0) {
            const Site p = box_.site_at(e.parent);
            pcoords = "[";
            for (int i = 0; i < p.dim; ++i) {
                pcoords += std::to_string(p.c[i]);
                if (i + 1 < p.dim) pcoords += ",";
            }
            pcoords += "]";
        }
        std::snprintf(buf, sizeof buf, "{\"t\":%.17g,\"site\":%s,\"species\":%d,\"parent\":%s}\n",
                      e.t.value(), coords.c_str(), static_cast<int>(e.species), pcoords.c_str());
        out += buf;
    }
    return out;
}

namespace {

struct Tentative {
    PathTime t;
    int64_t target;
    int8_t species;
    int8_t parent_code;
};

// Pop order: earliest time; on exact ties species 2 first, then
// lexicographically smallest target.
struct TentativeCmp {
    bool operator()(const Tentative& a, const Tentative& b) const {
        if (a.t != b.t) return b.t < a.t;
        if (a.species != b.species) return a.species < b.species;  // 2 pops first
        return b.target < a.target;
    }
};

}  // namespace

CompetitionTrace run_competition_with(const CompetitionConfig& cfg,
                                      const std::function<double(const Edge&, int)>& weight) {
    cfg.validate();
    const Box box(cfg.d, cfg.box_radius);
    CompetitionTrace trace(cfg, box);

    const size_t n = static_cast<size_t>(box.site_count());
    std::vector<PathTime> tent(n, PathTime::infinite());
    std::vector<int8_t> tent_species(n, 0);

    std::priority_queue<Tentative, std::vector<Tentative>, TentativeCmp> queue;
    int64_t live_s1_entries = 0;

    const PathTime horizon = (cfg.stop == StopRule::TMax)
                                 ? PathTime{cfg.t_max, std::numeric_limits<double>::infinity()}
                                 : PathTime::infinite();

    auto relax_from = [&](int64_t from_idx, const Site& from, int species, const PathTime& t0) {
        for (int axis = 0; axis < cfg.d; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int64_t nidx = box.neighbor_index(from_idx, axis, dir);
                if (nidx < 0 || trace.species_[static_cast<size_t>(nidx)] != 0) continue;
                const Site there = from.shifted(axis, dir);
                const double w = weight(edge_between(from, there), species);
                const PathTime cand = path_add(t0, w);
                auto& slot = tent[static_cast<size_t>(nidx)];
                // Strict improvements enter the queue; exact cross-species
                // ties also enter so the tie rule and tie_count see them.
                const bool improves = cand < slot;
                const bool cross_tie =
                    cand == slot && tent_species[static_cast<size_t>(nidx)] != species;
                if (improves || cross_tie) {
                    slot = cand;
                    tent_species[static_cast<size_t>(nidx)] = static_cast<int8_t>(species);
                    queue.push({cand, nidx, static_cast<int8_t>(species),
                                static_cast<int8_t>(axis * 2 + (dir < 0 ? 1 : 0))});
                    if (species == 1) ++live_s1_entries;
                }
            }
        }
    };

    auto claim = [&](int64_t idx, int species, const PathTime& t, int8_t parent_code,
                     int64_t parent_idx) {
        trace.species_[static_cast<size_t>(idx)] = static_cast<int8_t>(species);
        trace.claim_[static_cast<size_t>(idx)] = t;
        trace.parent_[static_cast<size_t>(idx)] = parent_code;
        ++trace.claimed_count_;
        if (cfg.keep_event_log)
            trace.events_.push_back({t, idx, parent_idx, static_cast<int8_t>(species)});
        const Site s = box.site_at(idx);
        if (box.on_frame(s)) {
            if (species == 1) trace.outcome_.g1_proxy = true;
            if (species == 2) trace.outcome_.g2_proxy = true;
            trace.outcome_.boundary_clipped = true;
        }
    };

    // The two sources are claimed at time 0 before any relaxation.
    const int64_t i1 = box.index_of(cfg.s1);
    const int64_t i2 = box.index_of(cfg.s2);
    claim(i1, 1, PathTime::zero(), -1, -1);
    claim(i2, 2, PathTime::zero(), -1, -1);

    bool stopped = false;
    if (cfg.stop == StopRule::TMax && horizon < PathTime::zero()) stopped = true;
    if (!stopped) {
        relax_from(i1, cfg.s1, 1, PathTime::zero());
        relax_from(i2, cfg.s2, 2, PathTime::zero());
    }

    while (!stopped && !queue.empty()) {
        const Tentative top = queue.top();
        queue.pop();
        if (top.species == 1) --live_s1_entries;
        const size_t tgt = static_cast<size_t>(top.target);

        if (trace.species_[tgt] != 0) {
            // Already claimed; an exact-time pop by the other species is a
            // tie the deterministic rule resolved.
            if (top.t == trace.claim_[tgt] && top.species != trace.species_[tgt])
                ++trace.tie_count_;
            continue;
        }
        // Superseded entries pop after their improver claimed the target,
        // so reaching an unclaimed target with a non-current time means
        // the entry is stale. Exact cross-species ties share the current
        // time and stay eligible (species 2 popped first).
        if (!(top.t == tent[tgt])) continue;
        if (horizon < top.t) break;

        const int64_t parent_idx =
            box.neighbor_index(top.target, top.parent_code >> 1, (top.parent_code & 1) ? -1 : +1);
        claim(top.target, top.species, top.t, top.parent_code, parent_idx);
        const Site here = box.site_at(top.target);

        if (cfg.stop == StopRule::EitherReachesFrame && box.on_frame(here)) {
            stopped = true;
            break;
        }
        if (cfg.stop_when_species1_decided && trace.outcome_.g1_proxy) {
            trace.outcome_.species1_decided_early = true;
            stopped = true;
            break;
        }

        relax_from(top.target, here, top.species, top.t);

        if (cfg.stop_when_species1_decided && live_s1_entries == 0 &&
            !trace.outcome_.g1_proxy) {
            trace.outcome_.species1_decided_early = true;
            stopped = true;
            break;
        }
    }

    auto& out = trace.outcome_;
    for (size_t i = 0; i < n; ++i) {
        if (trace.species_[i] == 1) ++out.final_count1;
        if (trace.species_[i] == 2) ++out.final_count2;
    }
    out.coex_proxy = out.g1_proxy && out.g2_proxy;
    return trace;
}

CompetitionTrace run_competition(const CompetitionConfig& cfg) {
    const EdgeSeedField field(cfg.master_seed);
    const PassageLaw law1 = cfg.law1;
    const PassageLaw law2 = cfg.law2;
    const CouplingMode mode = cfg.mode;
    return run_competition_with(cfg, [field, law1, law2, mode](const Edge& e, int species) {
        return edge_time(field, e, species == 1 ? law1 : law2, species, mode);
    });
}

TripleRun coupled_triple_run(const PassageLaw& law_p, const PassageLaw& law_q,
                             const PassageLaw& law_r, const CompetitionConfig& base) {
    if (stochastic_order(law_p, law_q) != StochOrder::dominates ||
        stochastic_order(law_q, law_r) != StochOrder::dominates ||
        stochastic_order(law_p, law_r) != StochOrder::dominates)
        throw std::invalid_argument("coupled_triple_run: laws must satisfy p < q < r strictly");

    auto with = [&](const PassageLaw& weak, const PassageLaw& strong) {
        CompetitionConfig cfg = base;
        cfg.mode = CouplingMode::SharedUniform;
        cfg.law1 = weak;
        cfg.law2 = strong;
        return run_competition(cfg);
    };
    return TripleRun{with(law_p, law_r), with(law_q, law_r), with(law_p, law_q)};
}

std::pair<FppField, FppField> make_coupled_fields(const CompetitionConfig& cfg) {
    const Box box(cfg.d, cfg.box_radius);
    const EdgeSeedField field(cfg.master_seed);
    const EdgeWeightSource w1{field, cfg.law1, 0};
    const EdgeWeightSource w2{field, cfg.law2, 0};
    std::optional<double> t_max;
    if (cfg.stop == StopRule::TMax) t_max = cfg.t_max;
    return {grow_ball(cfg.s1, w1, box, t_max), grow_ball(cfg.s2, w2, box, t_max)};
}

CouplingReport coupling_check(const CompetitionTrace& trace, const FppField& fpp1,
                              const FppField& fpp2) {
    const Box& box = trace.box();
    if (fpp1.box().dim() != box.dim() || fpp1.box().radius() != box.radius() ||
        fpp2.box().dim() != box.dim() || fpp2.box().radius() != box.radius())
        throw std::invalid_argument("coupling_check: box mismatch");
    if (!(fpp1.source() == trace.config().s1) || !(fpp2.source() == trace.config().s2))
        throw std::invalid_argument("coupling_check: source mismatch");

    CouplingReport report;
    auto fail = [&](int64_t idx, const char* what) {
        report.pass = false;
        report.detail = what;
        report.first_violation = box.site_at(idx);
    };

    // Sublevel-set form of the three inclusions: checking them pointwise
    // in the exact claim/travel times checks them at every t at once.
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        const int sp = trace.species_at_index(idx);
        if (sp == 1) {
            if (!fpp1.reached_index(idx) || trace.claim_index(idx) < fpp1.time_index(idx)) {
                fail(idx, "eta1(t) not contained in B1(t)");
                return report;
            }
        } else if (sp == 2) {
            if (!fpp2.reached_index(idx) || trace.claim_index(idx) < fpp2.time_index(idx)) {
                fail(idx, "eta2(t) not contained in B2(t)");
                return report;
            }
        }
        if (fpp1.reached_index(idx)) {
            if (sp == 0 || fpp1.time_index(idx) < trace.claim_index(idx)) {
                fail(idx, "B1(t) not contained in eta(t)");
                return report;
            }
        }
    }
    return report;
}

}  // namespace fpc
