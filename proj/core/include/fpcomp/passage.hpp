#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "fpcomp/lattice.hpp"

namespace fpc {

enum class LawFamily { Exponential, Uniform, ShiftedExponential, Deterministic };

/// Parametric passage-time law with support in [0, inf) and a closed-form
/// generalized inverse CDF. The `tag` keeps the exact decimal strings a
/// config supplied, so manifests echo them byte for byte.
struct PassageLaw {
    LawFamily family = LawFamily::Exponential;
    double p0 = 1.0;  // rate / a / shift / value
    double p1 = 0.0;  // unused / b / rate / unused
    std::string tag;

    static PassageLaw exponential(double rate);
    static PassageLaw uniform(double a, double b);
    static PassageLaw shifted_exponential(double shift, double rate);
    static PassageLaw deterministic(double value);

    std::string describe() const;

    friend bool operator==(const PassageLaw& a, const PassageLaw& b) {
        return a.family == b.family && a.p0 == b.p0 && a.p1 == b.p1;
    }
};

/// Generalized inverse of the CDF at u in [0,1): inf{x : F(x) >= u}.
/// Exponential quantiles are computed as the rate-1 quantile divided by
/// the rate, so that shared-uniform couplings of exponentials scale
/// pointwise by exactly one floating division.
double quantile(const PassageLaw& law, double u);

/// CDF F(x); used by distributional sanity tests.
double cdf(const PassageLaw& law, double x);

/// Mass at 0 and at the infimum of the support (analytic).
double atom_at_zero(const PassageLaw& law);
double atom_at_support_inf(const PassageLaw& law);

/// sup/inf of the support (inf may be attained or not; analytic).
double support_inf(const PassageLaw& law);
double support_sup(const PassageLaw& law);  // +inf for exponential families

// ---------------------------------------------------------------------------
// Edge seed field

/// Deterministic per-edge uniforms: u_e = hash(master_seed, edge, stream).
/// Streams index independent uniform families (0 and 1 feed the two
/// species in Independent mode; SharedUniform uses stream 0 for both).
class EdgeSeedField {
public:
    explicit EdgeSeedField(uint64_t master_seed) : seed_(master_seed) {}

    uint64_t master_seed() const { return seed_; }

    double uniform(const Edge& e, uint32_t stream) const;

private:
    uint64_t seed_;
};

enum class CouplingMode { SharedUniform, Independent };

/// Passage time of edge e for the given species under the coupling mode.
/// Pure in all arguments; identical across enumeration orders.
double edge_time(const EdgeSeedField& field, const Edge& e, const PassageLaw& law,
                 int species, CouplingMode mode);

// ---------------------------------------------------------------------------
// Stochastic order and assumptions

enum class Tri { yes, no, unknown };

const char* tri_name(Tri t);

/// Analytic pointwise comparison of quantile functions:
///   strictly_dominates: Q1 >= Q2 everywhere and laws differ.
/// Decided per family pair from closed forms, never by sampling.
enum class StochOrder { equal, dominates, dominated, incomparable };

StochOrder stochastic_order(const PassageLaw& a, const PassageLaw& b);

/// Critical thresholds used by the H3/H4 checks. Only the d=2 bond value
/// is exactly known; other entries are configuration inputs.
struct CriticalValues {
    double pc = std::numeric_limits<double>::quiet_NaN();
    double dir_pc = std::numeric_limits<double>::quiet_NaN();

    static CriticalValues defaults_for(int d);
};

struct AssumptionReport {
    bool h1_ordered = false;      // law1 dominates law2 strictly
    Tri h2_no_ties = Tri::unknown;
    bool h3_atom_below_pc = false;
    bool h4_support_atom_below_dirpc = false;
    bool h5_exp_moment = false;
    double pc_value_used = 0.0;
    double dirpc_value_used = 0.0;

    bool all_pass() const {
        return h1_ordered && h2_no_ties == Tri::yes && h3_atom_below_pc &&
               h4_support_atom_below_dirpc && h5_exp_moment;
    }
};

/// The H3 predicate in isolation: atom mass at 0 versus the percolation
/// threshold. Exposed so the threshold logic is testable for atom values
/// no supported family produces.
bool h3_holds(double atom_at_zero_mass, double pc);
bool h4_holds(double atom_at_support_inf_mass, double dir_pc);

/// Fills the report analytically from the family parameters. law1 is the
/// intended weak (slow) species.
AssumptionReport validate_assumptions(const PassageLaw& law1, const PassageLaw& law2, int d,
                                      std::optional<CriticalValues> critical = std::nullopt);

}  // namespace fpc
