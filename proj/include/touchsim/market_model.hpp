#pragma once

// Synthetic market generators: the independent up/middle/down event model,
// exponential-kernel Hawkes event times, and the two-state Markov alternative
// in which every event is a one-tick move and event times are Hawkes.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace touchsim {

// Per-event move distribution plus the fill-side parameters:
//   r_f          probability a resting order at the touch fills during an
//                event whose price does not trade through it,
//   p_fill_down  probability the order fills when the price does trade
//                through it (1 = a through-move always fills).
//
// The move probabilities may carry rounding slack (published tables sum to
// 0.9996..1.01); anything within kSimplexTol of a distribution is accepted
// and sampled proportionally.
struct ModelParams {
    double p_up{0.0};
    double p_mid{0.0};
    double p_down{0.0};
    double r_f{0.0};
    double p_fill_down{1.0};

    static constexpr double kSimplexTol = 0.02;

    void validate() const {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0 && std::isfinite(x); };
        if (!in01(p_up) || !in01(p_mid) || !in01(p_down))
            throw InvalidParams("move probabilities must lie in [0,1]");
        const double s = p_up + p_mid + p_down;
        if (std::abs(s - 1.0) > kSimplexTol)
            throw InvalidParams("move probabilities sum to " + std::to_string(s) +
                                ", outside 1 +/- " + std::to_string(kSimplexTol));
        if (!(s > 0.0))
            throw InvalidParams("move probabilities sum to zero");
        if (!std::isfinite(r_f) || r_f < 0.0 || r_f >= 1.0)
            throw InvalidParams("r_f must lie in [0,1)");
        if (!std::isfinite(p_fill_down) || p_fill_down <= 0.0 || p_fill_down > 1.0)
            throw InvalidParams("p_fill_down must lie in (0,1]");
    }

    // Same distribution with up and down swapped; the sell side of every
    // formula is the mirror image of the buy side.
    ModelParams mirrored() const {
        ModelParams m = *this;
        std::swap(m.p_up, m.p_down);
        return m;
    }
};

// Exponential-kernel self-exciting intensity
//   lambda(t) = mu + sum_{t_i < t} alpha * exp(-beta (t - t_i)).
struct HawkesParams {
    double mu{0.0};
    double alpha{0.0};
    double beta{1.0};

    void validate() const {
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw InvalidParams("mu must be positive");
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw InvalidParams("beta must be positive");
        if (alpha < 0.0 || !std::isfinite(alpha))
            throw InvalidParams("alpha must be non-negative");
        if (alpha >= beta)
            throw NonStationary("alpha/beta = " + std::to_string(alpha / beta) +
                                " >= 1: branching ratio must be below one");
    }

    double stationary_rate() const {
        validate();
        return mu / (1.0 - alpha / beta);
    }
};

enum class ChainState { Up, Down };

inline const char* to_string(ChainState s) { return s == ChainState::Up ? "U" : "D"; }

// Two-state move chain: after an up-tick the next move is up with p_uu, down
// with p_du; after a down-tick, up with p_ud, down with p_dd. Event times are
// Hawkes. `validate` checks only that the rows are distributions; formulas
// that need an irreducible chain call `validate_irreducible`.
struct GchpParams {
    double p_uu{0.0};
    double p_du{0.0};
    double p_ud{0.0};
    double p_dd{0.0};
    HawkesParams hawkes{};

    void validate() const {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0 && std::isfinite(x); };
        if (!in01(p_uu) || !in01(p_du) || !in01(p_ud) || !in01(p_dd))
            throw InvalidParams("chain probabilities must lie in [0,1]");
        if (std::abs((p_uu + p_du) - 1.0) > 1e-9)
            throw InvalidParams("p_uu + p_du must equal 1");
        if (std::abs((p_ud + p_dd) - 1.0) > 1e-9)
            throw InvalidParams("p_ud + p_dd must equal 1");
        hawkes.validate();
    }

    void validate_irreducible() const {
        validate();
        if (p_uu <= 0.0 || p_du <= 0.0 || p_ud <= 0.0 || p_dd <= 0.0)
            throw Reducible("chain has a zero transition probability; "
                            "no unique stationary distribution");
    }
};

// Stationary distribution (Q(U), Q(D)) of the move chain.
inline std::pair<double, double> gchp_steady_state(const GchpParams& g) {
    g.validate_irreducible();
    const double qu = g.p_ud / (g.p_ud + g.p_du);
    return {qu, 1.0 - qu};
}

struct TradeFlowParams {
    // Probability a middle event carries a trade print (fair-coin side).
    double p_trade_on_mid{0.05};

    void validate() const {
        if (!(p_trade_on_mid >= 0.0 && p_trade_on_mid <= 1.0) ||
            !std::isfinite(p_trade_on_mid))
            throw InvalidParams("p_trade_on_mid must lie in [0,1]");
    }
};

namespace detail {

inline void apply_move(MarketEvent& ev, MoveDirection m) {
    ev.move = m;
    const int dt = 2 * outcome_ticks(m);  // one tick = two half-ticks
    ev.best_bid += dt;
    ev.best_ask += dt;
}

}  // namespace detail

// Independent draws from (p_up, p_mid, p_down) on a fixed clock of `dt_s`
// seconds per event. `start_mid` is the mid in half-ticks before the first
// event and must be odd so the book sits on the grid with a one-tick spread.
inline std::vector<MarketEvent> simulate_umd(const ModelParams& params,
                                             std::int64_t n_steps, double dt_s,
                                             HalfTicks start_mid,
                                             std::uint64_t seed) {
    params.validate();
    if (n_steps < 0) throw InvalidParams("n_steps must be non-negative");
    if (!(dt_s > 0.0) || !std::isfinite(dt_s))
        throw InvalidParams("dt_s must be positive");
    if ((start_mid % 2 + 2) % 2 != 1)
        throw InvalidParams("start_mid must be odd (a one-tick-spread mid)");

    const double s = params.p_up + params.p_mid + params.p_down;
    const double cut_up = params.p_up / s;
    const double cut_mid = (params.p_up + params.p_mid) / s;

    Rng rng(sub_seed(seed, "umd-moves"));
    std::vector<MarketEvent> events;
    events.reserve(static_cast<std::size_t>(n_steps));

    MarketEvent ev;
    ev.best_bid = start_mid - 1;
    ev.best_ask = start_mid + 1;
    for (std::int64_t i = 0; i < n_steps; ++i) {
        ev.seq = i;
        ev.time_s = quantize_time_ns(static_cast<double>(i + 1) * dt_s);
        const double u = rng.uniform();
        detail::apply_move(ev, u < cut_up    ? MoveDirection::Up
                               : u < cut_mid ? MoveDirection::Middle
                                             : MoveDirection::Down);
        events.push_back(ev);
    }
    return events;
}

// Ogata thinning for the exponential kernel. The running excitation
// sum_{i} alpha e^{-beta(t - t_i)} decays multiplicatively between proposals,
// so the whole run is O(n) in accepted points.
inline std::vector<double> simulate_hawkes(const HawkesParams& h,
                                           double horizon_s,
                                           std::uint64_t seed) {
    h.validate();
    if (!(horizon_s >= 0.0) || !std::isfinite(horizon_s))
        throw InvalidParams("horizon must be non-negative");

    Rng rng(seed);
    std::vector<double> times;
    double t = 0.0;
    double excite = 0.0;  // kernel sum at current t, exclusive of a point at t
    while (true) {
        const double lambda_bar = h.mu + excite;
        const double w = rng.exponential(lambda_bar);
        t += w;
        if (t > horizon_s) break;
        excite *= std::exp(-h.beta * w);
        if (rng.uniform() * lambda_bar <= h.mu + excite) {
            double tq = quantize_time_ns(t);
            if (!times.empty() && tq <= times.back())  // next lattice point up
                tq = (std::nearbyint(times.back() * 1e9) + 1.0) / 1e9;
            if (tq > horizon_s) break;
            times.push_back(tq);
            excite += h.alpha;
        }
    }
    return times;
}

// First `n` Hawkes event times (same thinning loop, count-bounded).
inline std::vector<double> simulate_hawkes_n(const HawkesParams& h,
                                             std::int64_t n,
                                             std::uint64_t seed) {
    h.validate();
    if (n < 0) throw InvalidParams("n must be non-negative");

    Rng rng(seed);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n));
    double t = 0.0;
    double excite = 0.0;
    while (static_cast<std::int64_t>(times.size()) < n) {
        const double lambda_bar = h.mu + excite;
        const double w = rng.exponential(lambda_bar);
        t += w;
        excite *= std::exp(-h.beta * w);
        if (rng.uniform() * lambda_bar <= h.mu + excite) {
            double tq = quantize_time_ns(t);
            if (!times.empty() && tq <= times.back())
                tq = (std::nearbyint(times.back() * 1e9) + 1.0) / 1e9;
            times.push_back(tq);
            excite += h.alpha;
        }
    }
    return times;
}

// Move sequence of the two-state chain, starting from `start` (the first
// emitted move is the transition out of `start`).
inline std::vector<ChainState> simulate_markov_moves(const GchpParams& g,
                                                     std::int64_t n,
                                                     ChainState start,
                                                     std::uint64_t seed) {
    g.validate();
    if (n < 0) throw InvalidParams("n must be non-negative");
    Rng rng(seed);
    std::vector<ChainState> moves;
    moves.reserve(static_cast<std::size_t>(n));
    ChainState s = start;
    for (std::int64_t i = 0; i < n; ++i) {
        const double p_up_next = (s == ChainState::Up) ? g.p_uu : g.p_ud;
        s = rng.bernoulli(p_up_next) ? ChainState::Up : ChainState::Down;
        moves.push_back(s);
    }
    return moves;
}

namespace detail {

inline std::vector<MarketEvent> gchp_events_from(
    const std::vector<double>& times, const std::vector<ChainState>& moves,
    HalfTicks start_mid) {
    if ((start_mid % 2 + 2) % 2 != 1)
        throw InvalidParams("start_mid must be odd (a one-tick-spread mid)");
    std::vector<MarketEvent> events;
    events.reserve(times.size());
    MarketEvent ev;
    ev.best_bid = start_mid - 1;
    ev.best_ask = start_mid + 1;
    for (std::size_t i = 0; i < times.size(); ++i) {
        ev.seq = static_cast<std::int64_t>(i);
        ev.time_s = times[i];
        apply_move(ev, moves[i] == ChainState::Up ? MoveDirection::Up
                                                  : MoveDirection::Down);
        events.push_back(ev);
    }
    return events;
}

}  // namespace detail

// Markov-move / Hawkes-time stream over a fixed horizon. Every event is a
// one-tick move; there are no middle events in this model.
inline std::vector<MarketEvent> simulate_gchp(const GchpParams& g,
                                              double horizon_s,
                                              ChainState start_state,
                                              HalfTicks start_mid,
                                              std::uint64_t seed) {
    g.validate();
    const auto times = simulate_hawkes(g.hawkes, horizon_s, sub_seed(seed, "gchp-times"));
    const auto moves = simulate_markov_moves(
        g, static_cast<std::int64_t>(times.size()), start_state,
        sub_seed(seed, "gchp-moves"));
    return detail::gchp_events_from(times, moves, start_mid);
}

// Count-bounded variant: exactly `n` events.
inline std::vector<MarketEvent> simulate_gchp_n(const GchpParams& g,
                                                std::int64_t n,
                                                ChainState start_state,
                                                HalfTicks start_mid,
                                                std::uint64_t seed) {
    g.validate();
    const auto times = simulate_hawkes_n(g.hawkes, n, sub_seed(seed, "gchp-times"));
    const auto moves =
        simulate_markov_moves(g, n, start_state, sub_seed(seed, "gchp-moves"));
    return detail::gchp_events_from(times, moves, start_mid);
}

// Decorate a move stream with trade prints: an up-tick is driven by a buy
// aggressor, a down-tick by a sell aggressor, and a middle event prints a
// unit trade of fair-coin direction with probability p_trade_on_mid.
inline void attach_trades(std::vector<MarketEvent>& events,
                          const TradeFlowParams& t, std::uint64_t seed) {
    t.validate();
    Rng rng(sub_seed(seed, "trades"));
    for (auto& ev : events) {
        switch (ev.move) {
            case MoveDirection::Up:
                ev.trade = TradeMark{Aggressor::BuyAggressor, 1};
                break;
            case MoveDirection::Down:
                ev.trade = TradeMark{Aggressor::SellAggressor, 1};
                break;
            case MoveDirection::Middle:
                if (rng.bernoulli(t.p_trade_on_mid))
                    ev.trade = TradeMark{rng.bernoulli(0.5)
                                             ? Aggressor::BuyAggressor
                                             : Aggressor::SellAggressor,
                                         1};
                else
                    ev.trade.reset();
                break;
        }
    }
}

}  // namespace touchsim
