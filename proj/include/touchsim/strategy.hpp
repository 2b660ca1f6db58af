#pragma once

// The naive at-the-touch maker: quote both sides when flat, only the
// reducing side when long or short one lot, always at the current touch.

#include <optional>
#include <string>

#include "core.hpp"

namespace touchsim {

struct MakerState {
    int position{0};  // lots, clamped to {-1, 0, +1} by the posting rule
    std::optional<VirtualOrder> working_buy{};
    std::optional<VirtualOrder> working_sell{};
};

enum class SideAction { Keep, Post, Cancel };

// Post with an existing working order means an atomic cancel+post
// replacement (the replacement is a brand-new order).
struct SideQuote {
    SideAction action{SideAction::Keep};
    HalfTicks price{0};
};

struct QuoteInstruction {
    SideQuote buy{};
    SideQuote sell{};
};

namespace detail {

inline SideQuote side_quote(bool wanted, const std::optional<VirtualOrder>& working,
                            HalfTicks touch) {
    if (!wanted)
        return {working ? SideAction::Cancel : SideAction::Keep, 0};
    if (!working || working->price != touch) return {SideAction::Post, touch};
    return {SideAction::Keep, touch};
}

}  // namespace detail

// Quote decisions against the post-move book: flat quotes both touches, a
// long position quotes only the sell side (and vice versa), and a working
// order left off the touch by a price move is replaced.
inline QuoteInstruction desired_quotes(const MakerState& state,
                                       const MarketEvent& ev) {
    QuoteInstruction q;
    q.buy = detail::side_quote(state.position < 1, state.working_buy, ev.best_bid);
    q.sell = detail::side_quote(state.position > -1, state.working_sell, ev.best_ask);
    return q;
}

// Book a fill against the state. The engine guarantees the opposite-side
// order exists only when the band allows it, so a band exit here is a bug.
inline void apply_fill(MakerState& state, const FillRecord& fill) {
    if (fill.side == Side::Buy) {
        if (state.position >= 1)
            throw PositionBound("buy fill at position +" +
                                std::to_string(state.position));
        ++state.position;
        state.working_buy.reset();
    } else {
        if (state.position <= -1)
            throw PositionBound("sell fill at position " +
                                std::to_string(state.position));
        --state.position;
        state.working_sell.reset();
    }
}

}  // namespace touchsim
