#pragma once

// Closed-form drift and fill-probability formulas for a unit buy order
// resting at the best bid. The sell side is the same arithmetic applied to
// ModelParams::mirrored().
//
// Conventions: drifts are in ticks per event; a "fill" event is either the
// price ticking down through the order (probability p_fill_down per down
// move) or a queue fill without a through-move (probability r_f per up or
// middle move).

#include <cmath>
#include <string>

#include "market_model.hpp"

namespace touchsim {

// Unconditional per-event mid drift in ticks.
inline double drift_unconditional(const ModelParams& p) {
    p.validate();
    return p.p_up - p.p_down;
}

// Probability the resting buy order fills on a given event.
inline double fill_probability(const ModelParams& p) {
    p.validate();
    const double pf = p.p_fill_down * p.p_down + p.r_f * (p.p_mid + p.p_up);
    if (!(pf > 0.0))
        throw DegenerateFill("fill probability is zero for these parameters");
    return pf;
}

// Expected mid move (ticks) on the event, conditional on the order filling.
// Fills on down moves land the order on the wrong side of the new market;
// their weight enters with the -1 tick outcome, which is what drives the
// conditional drift negative even for a symmetric move distribution.
inline double drift_given_fill(const ModelParams& p) {
    const double pf = fill_probability(p);
    return (p.r_f * p.p_up - p.p_fill_down * p.p_down) / pf;
}

// --- Two-state Markov move chain ------------------------------------------

// Stationary per-event drift in ticks: E[+1 on up, -1 on down] one step ahead
// of the stationary state.
inline double gchp_drift_unconditional(const GchpParams& g) {
    const auto [qu, qd] = gchp_steady_state(g);
    return qu * (g.p_uu - g.p_du) + qd * (g.p_ud - g.p_dd);
}

namespace detail {

inline void check_gchp_rate(double r_f) {
    if (!std::isfinite(r_f) || r_f < 0.0 || r_f >= 1.0)
        throw InvalidRate("r_f must lie in [0,1)");
}

}  // namespace detail

// Stationary fill probability for the buy order: it always fills on a down
// move and with probability r_f on an up move (every event moves the price).
inline double gchp_fill_probability(const GchpParams& g, double r_f) {
    detail::check_gchp_rate(r_f);
    const auto [qu, qd] = gchp_steady_state(g);
    const double pf = qu * (r_f * g.p_uu + g.p_du) + qd * (r_f * g.p_ud + g.p_dd);
    if (!(pf > 0.0))
        throw DegenerateFill("fill probability is zero for these parameters");
    return pf;
}

// Expected next move (ticks) conditional on the current event filling the
// buy order. The conditioning couples the fill to the chain state, so the
// numerator weighs each state's next-move drift by how that state fills.
inline double gchp_drift_given_fill(const GchpParams& g, double r_f) {
    detail::check_gchp_rate(r_f);
    const auto [qu, qd] = gchp_steady_state(g);
    const double pf = gchp_fill_probability(g, r_f);
    const double num =
        qu * (r_f * g.p_uu - g.p_du) + qd * (r_f * g.p_ud - g.p_dd);
    return num / pf;
}

// Bundle of the three headline numbers for reporting.
struct DriftReport {
    double drift_unconditional_ticks{0.0};
    double fill_probability{0.0};
    double drift_given_fill_ticks{0.0};
};

inline DriftReport make_drift_report(const ModelParams& p) {
    return {drift_unconditional(p), fill_probability(p), drift_given_fill(p)};
}

inline DriftReport make_drift_report(const GchpParams& g, double r_f) {
    return {gchp_drift_unconditional(g), gchp_fill_probability(g, r_f),
            gchp_drift_given_fill(g, r_f)};
}

}  // namespace touchsim
