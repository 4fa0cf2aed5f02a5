#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpcomp/fpp.hpp"
#include "fpcomp/lattice.hpp"
#include "fpcomp/passage.hpp"
#include "fpcomp/pathtime.hpp"

namespace fpc {

enum class StopRule { BoxExhausted, TMax, EitherReachesFrame };

struct CompetitionConfig {
    int d = 2;
    int32_t box_radius = 100;
    Site s1;  // weak species source
    Site s2;  // strong species source
    PassageLaw law1;
    PassageLaw law2;
    CouplingMode mode = CouplingMode::SharedUniform;
    uint64_t master_seed = 0;
    StopRule stop = StopRule::BoxExhausted;
    double t_max = 0.0;  // only with StopRule::TMax
    bool keep_event_log = true;
    /// Sweep optimization: stop as soon as the species-1 escape proxy is
    /// decided (species 1 reached the frame, or has no live tentatives).
    /// Final counts are then lower bounds; traces used for analysis
    /// should not set this.
    bool stop_when_species1_decided = false;

    static CompetitionConfig two_sources(int d, int32_t box_radius);
    void validate() const;
};

struct GrowthOutcome {
    bool g1_proxy = false;  // species 1 claimed a frame site
    bool g2_proxy = false;
    bool coex_proxy = false;
    int64_t final_count1 = 0;
    int64_t final_count2 = 0;
    bool boundary_clipped = false;
    bool species1_decided_early = false;
};

struct CompetitionEvent {
    PathTime t;
    int64_t site = 0;    // flat index
    int64_t parent = 0;  // flat index
    int8_t species = 0;
};

/// Full record of one two-species run: claiming species and exact claim
/// time per site, plus (optionally) the ordered event log.
class CompetitionTrace {
public:
    CompetitionTrace(const CompetitionConfig& cfg, Box box);

    const CompetitionConfig& config() const { return cfg_; }
    const Box& box() const { return box_; }

    /// 0 = unclaimed, 1, 2.
    int species_at(const Site& x) const;
    double claim_time(const Site& x) const;  // +inf when unclaimed
    PathTime claim_exact(const Site& x) const;

    int species_at_index(int64_t idx) const { return species_[static_cast<size_t>(idx)]; }
    const PathTime& claim_index(int64_t idx) const { return claim_[static_cast<size_t>(idx)]; }
    int64_t parent_index(int64_t idx) const;

    const std::vector<CompetitionEvent>& events() const { return events_; }
    int64_t tie_count() const { return tie_count_; }
    const GrowthOutcome& outcome() const { return outcome_; }

    /// Sites claimed by each species no later than t, in lexicographic
    /// order (right-continuous in t).
    std::pair<std::vector<Site>, std::vector<Site>> snapshot(double t) const;
    std::pair<int64_t, int64_t> counts_at(double t) const;
    int64_t claimed_count() const { return claimed_count_; }

    /// Distinct claim times in increasing order (needs the event log).
    std::vector<double> event_times() const;

    /// JSON-lines export: one header object then one line per event.
    /// Byte-stable for identical inputs.
    std::string export_jsonl() const;

private:
    friend CompetitionTrace run_competition_with(
        const CompetitionConfig&, const std::function<double(const Edge&, int)>&);
    CompetitionConfig cfg_;
    Box box_;
    std::vector<int8_t> species_;
    std::vector<PathTime> claim_;
    std::vector<int8_t> parent_;
    std::vector<CompetitionEvent> events_;
    GrowthOutcome outcome_;
    int64_t tie_count_ = 0;
    int64_t claimed_count_ = 0;
};

/// Weight hook: passage time of an edge for one species. The standard
/// entry point builds it from the config; tests and oracles inject
/// materialized or symmetrized weights through it.
CompetitionTrace run_competition_with(const CompetitionConfig& cfg,
                                      const std::function<double(const Edge&, int)>& weight);

CompetitionTrace run_competition(const CompetitionConfig& cfg);

// ---------------------------------------------------------------------------
// Coupled runs

struct TripleRun {
    CompetitionTrace pr;  // weak p vs strong r
    CompetitionTrace qr;  // weak q vs strong r
    CompetitionTrace pq;  // weak p vs strong q
};

/// Runs the three pairings of p < q < r on one shared seed field
/// (SharedUniform forced). Requires the laws to be pairwise strictly
/// ordered: law_p dominates law_q dominates law_r.
TripleRun coupled_triple_run(const PassageLaw& law_p, const PassageLaw& law_q,
                             const PassageLaw& law_r, const CompetitionConfig& base);

// ---------------------------------------------------------------------------
// Coupling with single-type growth

struct CouplingReport {
    bool pass = true;
    std::string detail;
    Site first_violation;
};

/// Single-type fields coupled to a competition config: both grown from
/// the shared stream-0 uniforms, species 1 with law1, species 2 with the
/// pointwise smaller law2 times.
std::pair<FppField, FppField> make_coupled_fields(const CompetitionConfig& cfg);

/// Verifies the three coupling inclusions at every event time:
/// eta1(t) in B1(t), eta2(t) in B2(t), B1(t) in eta(t). Exact
/// (full-precision) comparisons; returns the first violation if any.
CouplingReport coupling_check(const CompetitionTrace& trace, const FppField& fpp1,
                              const FppField& fpp2);

}  // namespace fpc
