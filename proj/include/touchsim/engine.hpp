#pragma once

// Deterministic event-loop backtester. Per event, in order: evaluate fills
// for orders posted at earlier events against this event's move, book at
// most one fill, advance the fill engine's clocks, then let the strategy
// re-quote against the post-move book; new orders become fill-eligible at
// the next event. Cash is integer half-tick lots throughout, so the P&L
// identity cash + position * mid is exact.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core.hpp"
#include "fill_model.hpp"
#include "rng.hpp"
#include "strategy.hpp"

namespace touchsim {

enum class LifecycleKind { Added, Canceled, Filled };

inline const char* to_string(LifecycleKind k) {
    switch (k) {
        case LifecycleKind::Added: return "added";
        case LifecycleKind::Canceled: return "canceled";
        default: return "filled";
    }
}

struct LifecycleEvent {
    LifecycleKind kind{LifecycleKind::Added};
    std::int64_t order_id{0};
    std::int64_t seq{0};
    double time_s{0.0};
    HalfTicks price{0};
    Side side{Side::Buy};
};

struct WindowPoint {
    std::int64_t index{0};
    double t_start_s{0.0};
    std::int64_t pnl_ht{0};  // mark-to-market at the window's last event
    int position{0};
};

struct BacktestReport {
    TickGrid grid{};
    double window_s{300.0};
    std::int64_t n_events{0};
    std::int64_t n_orders{0};
    std::int64_t n_fills{0};
    std::int64_t final_cash_ht{0};
    int final_position{0};
    std::int64_t final_pnl_ht{0};
    std::vector<LifecycleEvent> lifecycle{};
    std::vector<FillRecord> fills{};
    std::vector<std::int64_t> pnl_by_event{};  // half-tick lots
    std::vector<std::int8_t> position_by_event{};
    std::vector<WindowPoint> pnl_windows{};

    double fill_rate() const {
        return n_orders == 0 ? 0.0
                             : static_cast<double>(n_fills) /
                                   static_cast<double>(n_orders);
    }

    double final_pnl_price() const {
        return static_cast<double>(final_pnl_ht) * grid.half_tick();
    }
};

// Mark-to-market in price units.
inline double mark_to_market(std::int64_t cash_ht, int position, HalfTicks mid,
                             const TickGrid& grid) {
    return static_cast<double>(cash_ht + position * mid) * grid.half_tick();
}

inline BacktestReport run_backtest(const std::vector<MarketEvent>& events,
                                   const TickGrid& grid,
                                   const FillTechnique& technique,
                                   double window_s, std::uint64_t seed) {
    if (events.empty()) throw EmptyStream("backtest needs a non-empty stream");
    if (!(window_s > 0.0)) throw InvalidParams("window_s must be positive");
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].seq != static_cast<std::int64_t>(i))
            throw MalformedStream("event seq " + std::to_string(events[i].seq) +
                                  " at index " + std::to_string(i) +
                                  "; expected contiguous 0-based seq");
        if (i > 0 && events[i].time_s < events[i - 1].time_s)
            throw MalformedStream("time decreases at seq " + std::to_string(i));
        if (events[i].best_ask <= events[i].best_bid)
            throw MalformedStream("ask <= bid at seq " + std::to_string(i));
    }

    const double t0 = events.front().time_s;
    auto fill_engine = make_fill_engine(technique, seed, t0, events.back().time_s);

    BacktestReport rep;
    rep.grid = grid;
    rep.window_s = window_s;
    rep.n_events = static_cast<std::int64_t>(events.size());
    rep.pnl_by_event.resize(events.size());
    rep.position_by_event.resize(events.size());

    MakerState state;
    std::int64_t cash = 0;
    std::int64_t next_id = 0;

    auto book_fill = [&](const VirtualOrder& order, const FillDecision& d,
                         const MarketEvent& ev) {
        rep.lifecycle.push_back({LifecycleKind::Filled, order.id, ev.seq,
                                 ev.time_s, order.price, order.side});
        FillRecord fr{order.id,      order.side, ev.seq, ev.time_s,
                      d.fill_price,  ev.mid(),   d.adverse};
        cash += (fr.side == Side::Buy) ? -fr.fill_price : fr.fill_price;
        rep.fills.push_back(fr);
        ++rep.n_fills;
        apply_fill(state, fr);  // clears the working slot; `order` dies here
    };

    auto cancel_order = [&](std::optional<VirtualOrder>& slot,
                            const MarketEvent& ev) {
        slot->state = OrderState::Canceled;
        rep.lifecycle.push_back({LifecycleKind::Canceled, slot->id, ev.seq,
                                 ev.time_s, slot->price, slot->side});
        slot.reset();
    };

    auto post_order = [&](std::optional<VirtualOrder>& slot, Side side,
                          HalfTicks price, const MarketEvent& ev) {
        slot = VirtualOrder{next_id++, side, price, 1, ev.seq,
                            OrderState::Working};
        rep.lifecycle.push_back({LifecycleKind::Added, slot->id, ev.seq,
                                 ev.time_s, price, side});
        fill_engine->order_created(*slot, ev.time_s);
        ++rep.n_orders;
    };

    for (const MarketEvent& ev : events) {
        // Fill evaluation: at most one fill booked per event.  The side whose
        // level an up/down move went through is evaluated first so a passive
        // fill on the other side cannot mask the through-move fill in the
        // same event; no-move events evaluate the buy first.  Both sides are
        // still asked for a decision so the techniques' random streams
        // advance uniformly; a second positive decision in the same event is
        // discarded and the order keeps working.
        bool filled_this_event = false;
        const Side first =
            ev.move == MoveDirection::Up ? Side::Sell : Side::Buy;
        const Side second = first == Side::Buy ? Side::Sell : Side::Buy;
        for (Side side : {first, second}) {
            auto& slot = side == Side::Buy ? state.working_buy : state.working_sell;
            if (!slot || slot->created_seq >= ev.seq) continue;
            const FillDecision d = fill_engine->decide(*slot, ev);
            if (d.filled && !filled_this_event) {
                book_fill(*slot, d, ev);
                filled_this_event = true;
            }
        }
        fill_engine->end_event(ev);

        const QuoteInstruction q = desired_quotes(state, ev);
        auto act = [&](std::optional<VirtualOrder>& slot, Side side,
                       const SideQuote& sq) {
            switch (sq.action) {
                case SideAction::Keep:
                    break;
                case SideAction::Cancel:
                    cancel_order(slot, ev);
                    break;
                case SideAction::Post:
                    if (slot) cancel_order(slot, ev);  // replacement
                    post_order(slot, side, sq.price, ev);
                    break;
            }
        };
        act(state.working_buy, Side::Buy, q.buy);
        act(state.working_sell, Side::Sell, q.sell);

        const std::size_t i = static_cast<std::size_t>(ev.seq);
        rep.pnl_by_event[i] = cash + state.position * ev.mid();
        rep.position_by_event[i] = static_cast<std::int8_t>(state.position);
    }

    // Remaining working orders are canceled at the last event so each order
    // id closes with exactly one terminal record.
    const MarketEvent& last = events.back();
    if (state.working_buy) cancel_order(state.working_buy, last);
    if (state.working_sell) cancel_order(state.working_sell, last);

    rep.final_cash_ht = cash;
    rep.final_position = state.position;
    rep.final_pnl_ht = rep.pnl_by_event.back();

    // One point per window that saw events: the window's closing mark.
    std::int64_t cur_window = -1;
    for (const MarketEvent& ev : events) {
        const auto w = static_cast<std::int64_t>((ev.time_s - t0) / window_s);
        if (w != cur_window) {
            rep.pnl_windows.push_back(
                {w, t0 + static_cast<double>(w) * window_s, 0, 0});
            cur_window = w;
        }
        rep.pnl_windows.back().pnl_ht =
            rep.pnl_by_event[static_cast<std::size_t>(ev.seq)];
        rep.pnl_windows.back().position =
            rep.position_by_event[static_cast<std::size_t>(ev.seq)];
    }
    return rep;
}

// Per-side drift samples around fills: for a fill at event f, the mid change
// in ticks from just before the fill event to `window_events` events later,
// so the window includes the move that caused the fill. The control panel
// draws the same number of windows at internally-seeded random anchors.
struct DriftPanel {
    std::vector<double> samples{};  // ticks
    double mean{0.0};
    double se{0.0};
    std::int64_t n{0};
};

struct DriftStats {
    std::int64_t window_events{0};
    DriftPanel buy{};
    DriftPanel sell{};
    DriftPanel control{};
};

namespace detail {

inline void finish_panel(DriftPanel& p) {
    p.n = static_cast<std::int64_t>(p.samples.size());
    if (p.n == 0) return;
    double s = 0.0;
    for (double x : p.samples) s += x;
    p.mean = s / static_cast<double>(p.n);
    if (p.n < 2) return;
    double q = 0.0;
    for (double x : p.samples) q += (x - p.mean) * (x - p.mean);
    p.se = std::sqrt(q / static_cast<double>(p.n - 1)) /
           std::sqrt(static_cast<double>(p.n));
}

}  // namespace detail

inline DriftStats drift_after_fills(const BacktestReport& rep,
                                    const std::vector<MarketEvent>& events,
                                    std::int64_t window_events = 100) {
    if (window_events < 1) throw InvalidParams("window_events must be >= 1");
    const auto n = static_cast<std::int64_t>(events.size());
    DriftStats out;
    out.window_events = window_events;

    auto window_change_ticks = [&](std::int64_t anchor_seq) {
        const HalfTicks from = events[static_cast<std::size_t>(anchor_seq - 1)].mid();
        const HalfTicks to =
            events[static_cast<std::size_t>(anchor_seq + window_events - 1)].mid();
        return static_cast<double>(to - from) / 2.0;
    };

    for (const FillRecord& f : rep.fills) {
        if (f.fill_seq < 1 || f.fill_seq + window_events - 1 >= n) continue;
        auto& panel = f.side == Side::Buy ? out.buy : out.sell;
        panel.samples.push_back(window_change_ticks(f.fill_seq));
    }
    const std::int64_t usable =
        static_cast<std::int64_t>(out.buy.samples.size() + out.sell.samples.size());
    if (usable == 0)
        throw InsufficientData("no fill has a full " +
                               std::to_string(window_events) + "-event window");

    // Control anchors use a fixed stream so identical inputs give identical
    // reports regardless of the backtest seed.
    Rng rng(sub_seed(0x7d31f0c2u, "drift-control"));
    const std::int64_t lo = 1, hi = n - window_events;  // inclusive anchor range
    if (hi >= lo) {
        for (std::int64_t k = 0; k < usable; ++k) {
            const auto a =
                lo + static_cast<std::int64_t>(rng.below(
                         static_cast<std::uint64_t>(hi - lo + 1)));
            out.control.samples.push_back(window_change_ticks(a));
        }
    }
    detail::finish_panel(out.buy);
    detail::finish_panel(out.sell);
    detail::finish_panel(out.control);
    return out;
}

}  // namespace touchsim
