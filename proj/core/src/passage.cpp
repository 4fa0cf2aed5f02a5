#include "fpcomp/passage.hpp"

#include <cmath>
#include <stdexcept>

#include "fpcomp/rng.hpp"

namespace fpc {

PassageLaw PassageLaw::exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be > 0");
    return {LawFamily::Exponential, rate, 0.0, {}};
}

PassageLaw PassageLaw::uniform(double a, double b) {
    if (a < 0.0 || b <= a) throw std::invalid_argument("uniform: need 0 <= a < b");
    return {LawFamily::Uniform, a, b, {}};
}

PassageLaw PassageLaw::shifted_exponential(double shift, double rate) {
    if (shift < 0.0 || rate <= 0.0)
        throw std::invalid_argument("shifted_exponential: need shift >= 0, rate > 0");
    return {LawFamily::ShiftedExponential, shift, rate, {}};
}

PassageLaw PassageLaw::deterministic(double value) {
    if (value <= 0.0) throw std::invalid_argument("deterministic: value must be > 0");
    return {LawFamily::Deterministic, value, 0.0, {}};
}

std::string PassageLaw::describe() const {
    char buf[96];
    switch (family) {
        case LawFamily::Exponential:
            std::snprintf(buf, sizeof buf, "exponential(rate=%.17g)", p0);
            break;
        case LawFamily::Uniform:
            std::snprintf(buf, sizeof buf, "uniform(a=%.17g,b=%.17g)", p0, p1);
            break;
        case LawFamily::ShiftedExponential:
            std::snprintf(buf, sizeof buf, "shifted_exponential(shift=%.17g,rate=%.17g)", p0, p1);
            break;
        case LawFamily::Deterministic:
            std::snprintf(buf, sizeof buf, "deterministic(value=%.17g)", p0);
            break;
    }
    return buf;
}

double quantile(const PassageLaw& law, double u) {
    if (!(u >= 0.0 && u < 1.0)) throw std::out_of_range("quantile: u outside [0,1)");
    switch (law.family) {
        case LawFamily::Exponential:
            // Rate-1 quantile divided by the rate: one rounding, so
            // couplings of exponentials scale pointwise exactly.
            return (-std::log1p(-u)) / law.p0;
        case LawFamily::Uniform:
            return law.p0 + u * (law.p1 - law.p0);
        case LawFamily::ShiftedExponential:
            return law.p0 + (-std::log1p(-u)) / law.p1;
        case LawFamily::Deterministic:
            return law.p0;
    }
    return 0.0;
}

double cdf(const PassageLaw& law, double x) {
    switch (law.family) {
        case LawFamily::Exponential:
            return x <= 0.0 ? 0.0 : -std::expm1(-law.p0 * x);
        case LawFamily::Uniform: {
            if (x < law.p0) return 0.0;
            if (x >= law.p1) return 1.0;
            return (x - law.p0) / (law.p1 - law.p0);
        }
        case LawFamily::ShiftedExponential:
            return x <= law.p0 ? 0.0 : -std::expm1(-law.p1 * (x - law.p0));
        case LawFamily::Deterministic:
            return x >= law.p0 ? 1.0 : 0.0;
    }
    return 0.0;
}

double atom_at_zero(const PassageLaw&) {
    // All supported families are either continuous or have their single
    // atom at a strictly positive value.
    return 0.0;
}

double atom_at_support_inf(const PassageLaw& law) {
    return law.family == LawFamily::Deterministic ? 1.0 : 0.0;
}

double support_inf(const PassageLaw& law) {
    switch (law.family) {
        case LawFamily::Exponential: return 0.0;
        case LawFamily::Uniform: return law.p0;
        case LawFamily::ShiftedExponential: return law.p0;
        case LawFamily::Deterministic: return law.p0;
    }
    return 0.0;
}

double support_sup(const PassageLaw& law) {
    switch (law.family) {
        case LawFamily::Exponential:
        case LawFamily::ShiftedExponential:
            return std::numeric_limits<double>::infinity();
        case LawFamily::Uniform: return law.p1;
        case LawFamily::Deterministic: return law.p0;
    }
    return 0.0;
}

double EdgeSeedField::uniform(const Edge& e, uint32_t stream) const {
    const Site& a = e.a;
    const uint64_t k0 = (static_cast<uint64_t>(static_cast<uint32_t>(a.c[0])) << 32) |
                        static_cast<uint32_t>(a.c[1]);
    const uint64_t k1 = (static_cast<uint64_t>(static_cast<uint32_t>(a.c[2])) << 32) |
                        static_cast<uint32_t>(a.c[3]);
    const uint64_t k2 = (static_cast<uint64_t>(a.dim) << 16) |
                        (static_cast<uint64_t>(e.axis()) << 8) | stream;
    return rng::unit(seed_, k0, k1, k2);
}

double edge_time(const EdgeSeedField& field, const Edge& e, const PassageLaw& law,
                 int species, CouplingMode mode) {
    const uint32_t stream =
        (mode == CouplingMode::SharedUniform) ? 0u : static_cast<uint32_t>(species - 1);
    return quantile(law, field.uniform(e, stream));
}

const char* tri_name(Tri t) {
    switch (t) {
        case Tri::yes: return "yes";
        case Tri::no: return "no";
        case Tri::unknown: return "unknown";
    }
    return "unknown";
}

namespace {

bool is_continuous(const PassageLaw& law) {
    return law.family != LawFamily::Deterministic;
}

// Q_a(u) >= Q_b(u) for all u in [0,1), decided from closed forms.
bool quantile_dominates(const PassageLaw& a, const PassageLaw& b) {
    using F = LawFamily;
    const F fa = a.family, fb = b.family;

    if (fa == F::Deterministic) return a.p0 >= support_sup(b);
    if (fb == F::Deterministic) return support_inf(a) >= b.p0;

    if (fa == F::Exponential && fb == F::Exponential) return a.p0 <= b.p0;
    if (fa == F::Uniform && fb == F::Uniform) return a.p0 >= b.p0 && a.p1 >= b.p1;
    if (fa == F::ShiftedExponential && fb == F::ShiftedExponential)
        return a.p0 >= b.p0 && a.p1 <= b.p1;

    // Unbounded tails dominate bounded ones only, never the reverse.
    if (fa == F::Uniform) return false;  // vs exponential tails

    if (fa == F::Exponential && fb == F::Uniform) {
        // E(u)/rate >= a2 + u*(b2-a2) iff a2 == 0 and rate*b2 <= 1
        // (inf_u E(u)/u = 1).
        return b.p0 == 0.0 && a.p0 * b.p1 <= 1.0;
    }
    if (fa == F::Exponential && fb == F::ShiftedExponential) {
        return b.p0 == 0.0 && a.p0 <= b.p1;
    }
    if (fa == F::ShiftedExponential && fb == F::Exponential) {
        return a.p1 <= b.p0;
    }
    if (fa == F::ShiftedExponential && fb == F::Uniform) {
        const double s = a.p0, rate = a.p1;
        const double lo = b.p0, width = b.p1 - b.p0;
        if (s < lo) return false;
        if (rate * width <= 1.0) return true;
        // Interior minimum of E(u)/rate - u*width at 1-u = 1/(rate*width).
        const double gmin = std::log(rate * width) / rate - width + 1.0 / rate;
        return s - lo + gmin >= 0.0;
    }
    return false;
}

}  // namespace

StochOrder stochastic_order(const PassageLaw& a, const PassageLaw& b) {
    if (a == b) return StochOrder::equal;
    const bool ab = quantile_dominates(a, b);
    const bool ba = quantile_dominates(b, a);
    if (ab && ba) return StochOrder::equal;  // same quantile function
    if (ab) return StochOrder::dominates;
    if (ba) return StochOrder::dominated;
    return StochOrder::incomparable;
}

CriticalValues CriticalValues::defaults_for(int d) {
    CriticalValues cv;
    if (d == 2) {
        cv.pc = 0.5;        // bond percolation on Z^2, exact
        cv.dir_pc = 0.6447;  // oriented bond percolation on Z^2, numerical
    }
    return cv;
}

bool h3_holds(double atom_at_zero_mass, double pc) {
    if (atom_at_zero_mass <= 0.0) return true;  // any threshold is positive
    if (atom_at_zero_mass >= 1.0) return false;
    return atom_at_zero_mass < pc;  // false when pc is unconfigured (NaN)
}

bool h4_holds(double atom_at_support_inf_mass, double dir_pc) {
    if (atom_at_support_inf_mass <= 0.0) return true;
    if (atom_at_support_inf_mass >= 1.0) return false;
    return atom_at_support_inf_mass < dir_pc;
}

namespace {

Tri h2_status(const PassageLaw& a, const PassageLaw& b) {
    // Over k+l >= 1 summands: any sum involving a continuous law is
    // continuous, and empty sums (value 0) never tie a strictly positive
    // deterministic sum.
    if (is_continuous(a) || is_continuous(b)) return Tri::yes;
    if (a.p0 == b.p0) return Tri::no;  // k = l collisions are certain
    return Tri::unknown;  // commensurability of the two atoms is not decided
}

}  // namespace

AssumptionReport validate_assumptions(const PassageLaw& law1, const PassageLaw& law2, int d,
                                      std::optional<CriticalValues> critical) {
    const CriticalValues cv = critical.value_or(CriticalValues::defaults_for(d));
    AssumptionReport r;
    r.pc_value_used = cv.pc;
    r.dirpc_value_used = cv.dir_pc;
    r.h1_ordered = stochastic_order(law1, law2) == StochOrder::dominates;
    r.h2_no_ties = h2_status(law1, law2);
    r.h3_atom_below_pc =
        h3_holds(atom_at_zero(law1), cv.pc) && h3_holds(atom_at_zero(law2), cv.pc);
    r.h4_support_atom_below_dirpc = h4_holds(atom_at_support_inf(law1), cv.dir_pc) &&
                                    h4_holds(atom_at_support_inf(law2), cv.dir_pc);
    // Exponential tails with gamma < rate; bounded support otherwise.
    r.h5_exp_moment = true;
    return r;
}

}  // namespace fpc
