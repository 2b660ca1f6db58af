#pragma once

// Pluggable fill logic. A backtest picks one of four techniques:
//
//   1. AlwaysFillOnTrade   every opposing trade print fills the order;
//   2. ExponentialFill     the order fills once it has rested lambda_f-
//                          distributed "queue time" measured in opposing-
//                          trade clock, per order;
//   3. AdverseBernoulli    through-moves fill with p_fill_down, everything
//                          else with r_f (the closed-form model's mechanics);
//   4. GroundTruthFills    through-moves as in 3, plus a pre-generated
//                          per-side stream of fill opportunities standing in
//                          for real executions.
//
// All techniques share the adverse branch predicate: the move traded through
// the resting price, so the order is on the wrong side of the new market.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "core.hpp"
#include "market_model.hpp"
#include "rng.hpp"

namespace touchsim {

struct AlwaysFillOnTrade {};

struct ExponentialFill {
    double lambda_f{0.0};
};

struct AdverseBernoulli {
    double r_f{0.0};
    double p_fill_down{1.0};
};

struct GroundTruthFills {
    double p_fill_down{1.0};
    HawkesParams opportunity{};
};

using FillTechnique = std::variant<AlwaysFillOnTrade, ExponentialFill,
                                   AdverseBernoulli, GroundTruthFills>;

inline void validate(const FillTechnique& t) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ExponentialFill>) {
                if (!(v.lambda_f > 0.0) || !std::isfinite(v.lambda_f))
                    throw InvalidParams("lambda_f must be positive");
            } else if constexpr (std::is_same_v<T, AdverseBernoulli>) {
                if (!std::isfinite(v.r_f) || v.r_f < 0.0 || v.r_f >= 1.0)
                    throw InvalidParams("r_f must lie in [0,1)");
                if (!std::isfinite(v.p_fill_down) || v.p_fill_down <= 0.0 ||
                    v.p_fill_down > 1.0)
                    throw InvalidParams("p_fill_down must lie in (0,1]");
            } else if constexpr (std::is_same_v<T, GroundTruthFills>) {
                if (!std::isfinite(v.p_fill_down) || v.p_fill_down <= 0.0 ||
                    v.p_fill_down > 1.0)
                    throw InvalidParams("p_fill_down must lie in (0,1]");
                v.opportunity.validate();
            }
        },
        t);
}

inline std::string technique_name(const FillTechnique& t) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AlwaysFillOnTrade>)
                return "always-on-trade";
            else if constexpr (std::is_same_v<T, ExponentialFill>)
                return "exponential-queue";
            else if constexpr (std::is_same_v<T, AdverseBernoulli>)
                return "adverse-bernoulli";
            else
                return "ground-truth";
        },
        t);
}

struct FillDecision {
    bool filled{false};
    bool adverse{false};
    HalfTicks fill_price{0};
};

// Did this event's move trade through the order? Post-move best prices are
// used so the predicate stays well defined even off the one-tick lattice.
inline bool adverse_move_hits(const VirtualOrder& order, const MarketEvent& ev) {
    if (order.side == Side::Buy)
        return ev.move == MoveDirection::Down && ev.best_ask <= order.price;
    return ev.move == MoveDirection::Up && ev.best_bid >= order.price;
}

// Stateful per-run decision engine. The backtest calls, for each event and
// each working order created strictly before it, decide(); then end_event()
// once per event so clocks and opportunity cursors advance.
class FillEngine {
public:
    virtual ~FillEngine() = default;

    virtual void order_created(const VirtualOrder&, double /*time_s*/) {}
    virtual FillDecision decide(const VirtualOrder& order,
                                const MarketEvent& ev) = 0;
    virtual void end_event(const MarketEvent&) {}
};

namespace detail {

class AlwaysEngine final : public FillEngine {
public:
    FillDecision decide(const VirtualOrder& order, const MarketEvent& ev) override {
        if (ev.trade && opposes(ev.trade->aggressor, order.side))
            return {true, false, order.price};
        return {};
    }
};

// Per-order exponential queue time, consumed on the opposing-trade clock:
// the order fills on the first opposing print at least `wait` seconds after
// the previous opposing print (or after the stream start if none yet).
class ExponentialEngine final : public FillEngine {
public:
    ExponentialEngine(double lambda_f, std::uint64_t seed, double t0)
        : lambda_(lambda_f), rng_(seed), last_buy_print_(t0), last_sell_print_(t0) {}

    void order_created(const VirtualOrder& order, double) override {
        if (order.id >= static_cast<std::int64_t>(wait_.size()))
            wait_.resize(static_cast<std::size_t>(order.id) + 1, 0.0);
        wait_[static_cast<std::size_t>(order.id)] = rng_.exponential(lambda_);
    }

    FillDecision decide(const VirtualOrder& order, const MarketEvent& ev) override {
        if (!ev.trade || !opposes(ev.trade->aggressor, order.side)) return {};
        const double since = ev.time_s - last_opposing(order.side);
        if (since >= wait_[static_cast<std::size_t>(order.id)])
            return {true, false, order.price};
        return {};
    }

    void end_event(const MarketEvent& ev) override {
        if (!ev.trade) return;
        if (ev.trade->aggressor == Aggressor::BuyAggressor)
            last_buy_print_ = ev.time_s;
        else
            last_sell_print_ = ev.time_s;
    }

private:
    double last_opposing(Side s) const {
        return s == Side::Buy ? last_sell_print_ : last_buy_print_;
    }

    double lambda_;
    Rng rng_;
    double last_buy_print_;
    double last_sell_print_;
    std::vector<double> wait_;
};

class BernoulliEngine final : public FillEngine {
public:
    BernoulliEngine(double r_f, double p_fill_down, std::uint64_t seed)
        : r_f_(r_f), p_fd_(p_fill_down), rng_(seed) {}

    FillDecision decide(const VirtualOrder& order, const MarketEvent& ev) override {
        if (adverse_move_hits(order, ev)) {
            if (rng_.bernoulli(p_fd_)) return {true, true, order.price};
            return {};  // survived the through-move; no second chance this event
        }
        if (rng_.bernoulli(r_f_)) return {true, false, order.price};
        return {};
    }

private:
    double r_f_;
    double p_fd_;
    Rng rng_;
};

// Stand-in for recorded executions: independent per-side Hawkes streams of
// fill opportunities. An opportunity in (prev event time, this event time]
// fills a working order on that side; opportunities lapse with the events
// whether or not an order was there to take them.
class GroundTruthEngine final : public FillEngine {
public:
    GroundTruthEngine(const GroundTruthFills& cfg, std::uint64_t seed,
                      double t0, double t_end)
        : p_fd_(cfg.p_fill_down), rng_(sub_seed(seed, "gt-adverse")) {
        const double horizon = t_end - t0;
        buy_opps_ = simulate_hawkes(cfg.opportunity, horizon,
                                    sub_seed(seed, "gt-opps-buy"));
        sell_opps_ = simulate_hawkes(cfg.opportunity, horizon,
                                     sub_seed(seed, "gt-opps-sell"));
        for (auto& t : buy_opps_) t += t0;
        for (auto& t : sell_opps_) t += t0;
    }

    FillDecision decide(const VirtualOrder& order, const MarketEvent& ev) override {
        if (adverse_move_hits(order, ev)) {
            if (rng_.bernoulli(p_fd_)) return {true, true, order.price};
            return {};
        }
        const auto& opps = order.side == Side::Buy ? buy_opps_ : sell_opps_;
        auto& cursor = order.side == Side::Buy ? buy_cursor_ : sell_cursor_;
        if (cursor < opps.size() && opps[cursor] <= ev.time_s)
            return {true, false, order.price};
        return {};
    }

    void end_event(const MarketEvent& ev) override {
        while (buy_cursor_ < buy_opps_.size() && buy_opps_[buy_cursor_] <= ev.time_s)
            ++buy_cursor_;
        while (sell_cursor_ < sell_opps_.size() &&
               sell_opps_[sell_cursor_] <= ev.time_s)
            ++sell_cursor_;
    }

private:
    double p_fd_;
    Rng rng_;
    std::vector<double> buy_opps_;
    std::vector<double> sell_opps_;
    std::size_t buy_cursor_{0};
    std::size_t sell_cursor_{0};
};

}  // namespace detail

// Build the engine for a run spanning [t0, t_end] in event time.
inline std::unique_ptr<FillEngine> make_fill_engine(const FillTechnique& t,
                                                    std::uint64_t seed,
                                                    double t0, double t_end) {
    validate(t);
    return std::visit(
        [&](const auto& v) -> std::unique_ptr<FillEngine> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AlwaysFillOnTrade>)
                return std::make_unique<detail::AlwaysEngine>();
            else if constexpr (std::is_same_v<T, ExponentialFill>)
                return std::make_unique<detail::ExponentialEngine>(
                    v.lambda_f, sub_seed(seed, "fill-exp"), t0);
            else if constexpr (std::is_same_v<T, AdverseBernoulli>)
                return std::make_unique<detail::BernoulliEngine>(
                    v.r_f, v.p_fill_down, sub_seed(seed, "fill-bern"));
            else
                return std::make_unique<detail::GroundTruthEngine>(v, seed, t0,
                                                                   t_end);
        },
        t);
}

}  // namespace touchsim
