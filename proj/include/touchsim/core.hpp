#pragma once

// Core vocabulary types shared by every module: the half-tick price grid,
// price-move and order primitives, and the exception family.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace touchsim {

// Prices live on an integer half-tick grid. Quotable prices (bid, ask,
// trade prices) are even; a one-tick-spread mid is odd. Keeping everything
// integral makes P&L arithmetic exact.
using HalfTicks = std::int64_t;

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OffGridPrice : SimError { using SimError::SimError; };
struct InvalidSpread : SimError { using SimError::SimError; };
struct InvalidParams : SimError { using SimError::SimError; };
struct NonStationary : SimError { using SimError::SimError; };
struct Reducible : SimError { using SimError::SimError; };
struct DegenerateFill : SimError { using SimError::SimError; };
struct InvalidRate : SimError { using SimError::SimError; };
struct PositionBound : SimError { using SimError::SimError; };
struct MalformedStream : SimError { using SimError::SimError; };
struct ParseError : SimError { using SimError::SimError; };
struct NonMonotoneTime : SimError { using SimError::SimError; };
struct EmptyStream : SimError { using SimError::SimError; };
struct InsufficientData : SimError { using SimError::SimError; };

// Conversion between external (double) prices and the internal half-tick
// grid. A price is on-grid iff it is an integer multiple of tick_size/2,
// up to a relative tolerance that absorbs decimal round-tripping.
class TickGrid {
public:
    TickGrid() : TickGrid(1.0 / 64.0) {}

    explicit TickGrid(double tick_size) : tick_(tick_size) {
        if (!(tick_size > 0.0) || !std::isfinite(tick_size))
            throw InvalidParams("tick_size must be positive and finite");
    }

    double tick_size() const { return tick_; }
    double half_tick() const { return tick_ / 2.0; }

    HalfTicks to_internal(double price) const {
        const double half = tick_ / 2.0;
        const double k = price / half;
        const double kr = std::nearbyint(k);
        if (std::abs(k - kr) * half > 1e-9 * tick_ ||
            std::abs(kr) > 9.0e15)
            throw OffGridPrice("price " + std::to_string(price) +
                               " is not on the half-tick grid (tick_size=" +
                               std::to_string(tick_) + ")");
        return static_cast<HalfTicks>(std::llround(kr));
    }

    double to_external(HalfTicks p) const {
        return static_cast<double>(p) * (tick_ / 2.0);
    }

private:
    double tick_;
};

// One event's price action: the book ticked up, stayed, or ticked down.
enum class MoveDirection { Up, Middle, Down };

inline int outcome_ticks(MoveDirection m) {
    switch (m) {
        case MoveDirection::Up: return +1;
        case MoveDirection::Down: return -1;
        default: return 0;
    }
}

inline const char* to_string(MoveDirection m) {
    switch (m) {
        case MoveDirection::Up: return "U";
        case MoveDirection::Down: return "D";
        default: return "M";
    }
}

enum class Side { Buy, Sell };

inline const char* to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

// Which side initiated a trade print. A buy aggressor lifts the ask and can
// fill resting sell orders; a sell aggressor hits the bid and fills buys.
enum class Aggressor { BuyAggressor, SellAggressor };

inline bool opposes(Aggressor a, Side order_side) {
    return (order_side == Side::Buy) ? a == Aggressor::SellAggressor
                                     : a == Aggressor::BuyAggressor;
}

struct TradeMark {
    Aggressor aggressor{Aggressor::BuyAggressor};
    std::int64_t qty{1};
};

// One resampled event of the touch: the post-move best quotes plus an
// optional trade print that arrived with it.
struct MarketEvent {
    std::int64_t seq{0};
    double time_s{0.0};
    MoveDirection move{MoveDirection::Middle};
    HalfTicks best_bid{0};
    HalfTicks best_ask{0};
    std::optional<TradeMark> trade{};

    HalfTicks mid() const { return (best_bid + best_ask) / 2; }
};

// Mid of a one-tick market; events off the unit spread have no canonical mid.
inline HalfTicks mid_of(const MarketEvent& ev) {
    if (ev.best_ask - ev.best_bid != 2)
        throw InvalidSpread("event " + std::to_string(ev.seq) +
                            ": spread is not one tick (bid=" +
                            std::to_string(ev.best_bid) + ", ask=" +
                            std::to_string(ev.best_ask) + ")");
    return ev.best_bid + 1;
}

enum class OrderState { Working, Filled, Canceled };

// A unit limit order resting at the touch. `created_seq` is the event during
// which it was posted; it becomes fill-eligible on the next event.
struct VirtualOrder {
    std::int64_t id{0};
    Side side{Side::Buy};
    HalfTicks price{0};
    std::int64_t qty{1};
    std::int64_t created_seq{0};
    OrderState state{OrderState::Working};
};

struct FillRecord {
    std::int64_t order_id{0};
    Side side{Side::Buy};
    std::int64_t fill_seq{0};
    double time_s{0.0};
    HalfTicks fill_price{0};
    HalfTicks mid_at_fill{0};
    bool adverse{false};
};

}  // namespace touchsim
