#pragma once

// Parameter estimation from event streams, the fixed-interval resampling it
// rides on, the theory-vs-empirical drift comparison, and the inter-arrival
// tail diagnostic for the exponential fill model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "engine.hpp"
#include "market_model.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "theory.hpp"

namespace touchsim {

// One fixed-length wall-clock interval: the last-known book state, the mid
// move versus the previous interval, and OR-aggregated order/fill flags.
// Interval 0's move is measured against the pre-stream book implied by the
// first event, so every interval carries a well-defined move.
struct ResampledInterval {
    std::int64_t t_index{0};
    HalfTicks last_bid{0};
    HalfTicks last_ask{0};
    HalfTicks last_mid{0};
    MoveDirection move{MoveDirection::Middle};
    HalfTicks mid_change_ht{0};
    bool order_active_buy{false};
    bool order_active_sell{false};
    bool fill_buy{false};
    bool fill_sell{false};
};

namespace detail {

struct OrderSpan {
    Side side{Side::Buy};
    std::int64_t added_seq{-1};
    std::int64_t terminal_seq{-1};
    bool has_added{false};
    bool has_terminal{false};
};

// Per-event exposure and fill flags reconstructed from a lifecycle log.
// An order posted during event a is fill-eligible on events (a, terminal];
// the terminal event itself counts because cancels happen after the fill
// evaluation phase.
struct EventFlags {
    std::vector<std::uint8_t> active_buy, active_sell, fill_buy, fill_sell;
};

inline EventFlags event_flags(const std::vector<LifecycleEvent>& lifecycle,
                              std::size_t n_events) {
    EventFlags f;
    f.active_buy.assign(n_events, 0);
    f.active_sell.assign(n_events, 0);
    f.fill_buy.assign(n_events, 0);
    f.fill_sell.assign(n_events, 0);

    std::unordered_map<std::int64_t, OrderSpan> spans;
    spans.reserve(lifecycle.size() / 2 + 1);
    for (const LifecycleEvent& le : lifecycle) {
        OrderSpan& s = spans[le.order_id];
        s.side = le.side;
        if (le.kind == LifecycleKind::Added) {
            s.added_seq = le.seq;
            s.has_added = true;
        } else {
            s.terminal_seq = le.seq;
            s.has_terminal = true;
            if (le.kind == LifecycleKind::Filled &&
                le.seq < static_cast<std::int64_t>(n_events)) {
                auto& ff = le.side == Side::Buy ? f.fill_buy : f.fill_sell;
                ff[static_cast<std::size_t>(le.seq)] = 1;
            }
        }
    }
    for (const auto& [id, s] : spans) {
        if (!s.has_added || !s.has_terminal) continue;
        auto& act = s.side == Side::Buy ? f.active_buy : f.active_sell;
        const auto lo = s.added_seq + 1;
        const auto hi =
            std::min(s.terminal_seq, static_cast<std::int64_t>(n_events) - 1);
        for (std::int64_t e = lo; e <= hi; ++e)
            act[static_cast<std::size_t>(e)] = 1;
    }
    return f;
}

}  // namespace detail

inline std::vector<ResampledInterval> resample(
    const std::vector<MarketEvent>& events,
    const std::vector<LifecycleEvent>& lifecycle, double interval_s = 1.0) {
    if (events.empty()) throw EmptyStream("resample needs events");
    if (!(interval_s > 0.0) || !std::isfinite(interval_s))
        throw InvalidParams("interval_s must be positive");
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].time_s < events[i - 1].time_s)
            throw NonMonotoneTime("event time decreases at index " +
                                  std::to_string(i));

    const auto flags = detail::event_flags(lifecycle, events.size());
    const double t0 = events.front().time_s;
    const auto max_idx = static_cast<std::int64_t>(
        (events.back().time_s - t0) / interval_s);

    std::vector<ResampledInterval> out;
    out.reserve(static_cast<std::size_t>(max_idx) + 1);

    std::size_t e = 0;
    HalfTicks prev_mid =
        events.front().mid() - 2 * outcome_ticks(events.front().move);
    for (std::int64_t i = 0; i <= max_idx; ++i) {
        ResampledInterval iv;
        iv.t_index = i;
        if (!out.empty()) {
            iv.last_bid = out.back().last_bid;
            iv.last_ask = out.back().last_ask;
            iv.last_mid = out.back().last_mid;
        }
        while (e < events.size() &&
               static_cast<std::int64_t>((events[e].time_s - t0) / interval_s) ==
                   i) {
            const MarketEvent& ev = events[e];
            iv.last_bid = ev.best_bid;
            iv.last_ask = ev.best_ask;
            iv.last_mid = ev.mid();
            const auto s = static_cast<std::size_t>(ev.seq);
            if (s < flags.active_buy.size()) {
                iv.order_active_buy |= flags.active_buy[s] != 0;
                iv.order_active_sell |= flags.active_sell[s] != 0;
                iv.fill_buy |= flags.fill_buy[s] != 0;
                iv.fill_sell |= flags.fill_sell[s] != 0;
            }
            ++e;
        }
        iv.mid_change_ht = iv.last_mid - prev_mid;
        iv.move = iv.mid_change_ht > 0   ? MoveDirection::Up
                  : iv.mid_change_ht < 0 ? MoveDirection::Down
                                         : MoveDirection::Middle;
        prev_mid = iv.last_mid;
        out.push_back(iv);
    }
    return out;
}

inline std::vector<ResampledInterval> resample(
    const std::vector<MarketEvent>& events, double interval_s = 1.0) {
    return resample(events, {}, interval_s);
}

struct UmdEstimate {
    double p_up{0.0};
    double p_mid{0.0};
    double p_down{0.0};
    double se_up{0.0};
    double se_mid{0.0};
    double se_down{0.0};
    std::int64_t n_steps{0};
    std::int64_t n_multi_tick{0};
};

// Per-interval move frequencies. p_mid is fixed by the other two so the
// three sum to one exactly.
inline UmdEstimate estimate_umd(const std::vector<ResampledInterval>& intervals) {
    if (intervals.size() < 2)
        throw EmptyStream("need at least two intervals to count moves");
    UmdEstimate est;
    std::int64_t up = 0, down = 0;
    for (const ResampledInterval& iv : intervals) {
        if (iv.move == MoveDirection::Up) ++up;
        if (iv.move == MoveDirection::Down) ++down;
        if (std::abs(iv.mid_change_ht) > 2) ++est.n_multi_tick;
    }
    est.n_steps = static_cast<std::int64_t>(intervals.size());
    const auto n = static_cast<double>(est.n_steps);
    est.p_up = static_cast<double>(up) / n;
    est.p_down = static_cast<double>(down) / n;
    est.p_mid = 1.0 - est.p_up - est.p_down;
    est.se_up = binomial_se(est.p_up, est.n_steps);
    est.se_mid = binomial_se(est.p_mid, est.n_steps);
    est.se_down = binomial_se(est.p_down, est.n_steps);
    return est;
}

struct FillRateEstimate {
    double r_f{0.0};
    double se_r_f{0.0};
    std::int64_t n_nonadverse_exposure{0};
    std::int64_t n_nonadverse_fills{0};
    std::optional<double> p_fill_down{};
    double se_p_fill_down{0.0};
    std::int64_t n_adverse_exposure{0};
    std::int64_t n_adverse_fills{0};
};

// Fill frequencies conditioned on exposure, pooled over both sides. A buy
// order is adversely exposed in a Down interval (the price moved through
// it); everything else order-active is non-adverse exposure for r_f.
inline FillRateEstimate estimate_fill_rates(
    const std::vector<ResampledInterval>& intervals) {
    FillRateEstimate est;
    for (const ResampledInterval& iv : intervals) {
        if (iv.order_active_buy) {
            if (iv.move == MoveDirection::Down) {
                ++est.n_adverse_exposure;
                est.n_adverse_fills += iv.fill_buy ? 1 : 0;
            } else {
                ++est.n_nonadverse_exposure;
                est.n_nonadverse_fills += iv.fill_buy ? 1 : 0;
            }
        }
        if (iv.order_active_sell) {
            if (iv.move == MoveDirection::Up) {
                ++est.n_adverse_exposure;
                est.n_adverse_fills += iv.fill_sell ? 1 : 0;
            } else {
                ++est.n_nonadverse_exposure;
                est.n_nonadverse_fills += iv.fill_sell ? 1 : 0;
            }
        }
    }
    if (est.n_nonadverse_exposure == 0)
        throw InsufficientData("no order-active intervals without adverse moves");
    est.r_f = static_cast<double>(est.n_nonadverse_fills) /
              static_cast<double>(est.n_nonadverse_exposure);
    est.se_r_f = binomial_se(est.r_f, est.n_nonadverse_exposure);
    if (est.n_adverse_exposure > 0) {
        est.p_fill_down = static_cast<double>(est.n_adverse_fills) /
                          static_cast<double>(est.n_adverse_exposure);
        est.se_p_fill_down = binomial_se(*est.p_fill_down, est.n_adverse_exposure);
    }
    return est;
}

struct LambdaEstimate {
    double lambda_f{0.0};
    double se{0.0};
    std::int64_t n_gaps{0};
    double mean_gap_s{0.0};
};

// Inverse mean inter-fill gap, with a delta-method standard error.
inline LambdaEstimate estimate_lambda_f(std::vector<double> fill_times) {
    if (fill_times.size() < 2)
        throw InsufficientData("need at least two fills for a gap");
    std::sort(fill_times.begin(), fill_times.end());
    std::vector<double> gaps;
    gaps.reserve(fill_times.size() - 1);
    for (std::size_t i = 1; i < fill_times.size(); ++i)
        gaps.push_back(fill_times[i] - fill_times[i - 1]);
    LambdaEstimate est;
    est.n_gaps = static_cast<std::int64_t>(gaps.size());
    est.mean_gap_s = mean(gaps);
    if (!(est.mean_gap_s > 0.0))
        throw InsufficientData("all fills share one timestamp");
    est.lambda_f = 1.0 / est.mean_gap_s;
    est.se = sample_sd(gaps) /
             (est.mean_gap_s * est.mean_gap_s *
              std::sqrt(static_cast<double>(est.n_gaps)));
    return est;
}

struct CalibrationResult {
    UmdEstimate umd{};
    FillRateEstimate rates{};
    std::optional<LambdaEstimate> lambda{};
    std::int64_t n_intervals{0};
    double interval_s{1.0};
};

// Full estimation pass over one stream and its order lifecycle.
inline CalibrationResult calibrate(const std::vector<MarketEvent>& events,
                                   const std::vector<LifecycleEvent>& lifecycle,
                                   double interval_s = 1.0) {
    const auto intervals = resample(events, lifecycle, interval_s);
    CalibrationResult out;
    out.n_intervals = static_cast<std::int64_t>(intervals.size());
    out.interval_s = interval_s;
    out.umd = estimate_umd(intervals);
    out.rates = estimate_fill_rates(intervals);
    std::vector<double> fill_times;
    for (const LifecycleEvent& le : lifecycle)
        if (le.kind == LifecycleKind::Filled) fill_times.push_back(le.time_s);
    if (fill_times.size() >= 2) out.lambda = estimate_lambda_f(std::move(fill_times));
    return out;
}

struct DriftComparison {
    double theoretical_ticks{0.0};
    double empirical_ticks{0.0};
    double empirical_se{0.0};
    std::int64_t n_fills{0};
};

// Theory vs. measurement on the interval clock: the empirical number is the
// mean mid change (ticks) of the interval containing each fill, sell fills
// negated so both sides pool into the buy convention.
inline DriftComparison compare_drift(const ModelParams& model,
                                     const BacktestReport& report,
                                     const std::vector<MarketEvent>& events,
                                     double interval_s = 1.0) {
    DriftComparison out;
    out.theoretical_ticks = drift_given_fill(model);
    const auto intervals = resample(events, interval_s);
    const double t0 = events.front().time_s;
    std::vector<double> samples;
    samples.reserve(report.fills.size());
    for (const FillRecord& f : report.fills) {
        const auto idx = static_cast<std::int64_t>((f.time_s - t0) / interval_s);
        if (idx < 0 || idx >= static_cast<std::int64_t>(intervals.size()))
            continue;
        const double d =
            static_cast<double>(intervals[static_cast<std::size_t>(idx)]
                                    .mid_change_ht) /
            2.0;
        samples.push_back(f.side == Side::Buy ? d : -d);
    }
    if (samples.empty())
        throw InsufficientData("no fill lands in a measurable interval");
    out.n_fills = static_cast<std::int64_t>(samples.size());
    out.empirical_ticks = mean(samples);
    out.empirical_se = standard_error(samples);
    return out;
}

struct TailReport {
    std::vector<double> gaps{};      // observed inter-fill gaps, sorted
    std::vector<double> ref_gaps{};  // Exp(lambda_f) reference, sorted
    double ks{0.0};
    std::int64_t n{0};
    std::int64_t m{0};
    Histogram observed_hist{};
    Histogram reference_hist{};

    bool rejects(double alpha) const {
        return ks > ks_two_sample_threshold(alpha, n, m);
    }
};

// Observed inter-fill gaps against an equal-mean exponential sample: the
// histogram pair for plotting plus a two-sample KS statistic. The reference
// draw uses a fixed internal seed so reports are reproducible.
inline TailReport interarrival_tail_report(std::vector<double> fill_times,
                                           double lambda_f) {
    if (fill_times.size() < 30)
        throw InsufficientData("need at least 30 fills for a tail report");
    if (!(lambda_f > 0.0) || !std::isfinite(lambda_f))
        throw InvalidParams("lambda_f must be positive");
    std::sort(fill_times.begin(), fill_times.end());
    TailReport rep;
    rep.gaps.reserve(fill_times.size() - 1);
    for (std::size_t i = 1; i < fill_times.size(); ++i)
        rep.gaps.push_back(fill_times[i] - fill_times[i - 1]);
    std::sort(rep.gaps.begin(), rep.gaps.end());
    rep.n = static_cast<std::int64_t>(rep.gaps.size());

    Rng rng(sub_seed(0x9c1af253u, "tail-ref"));
    rep.ref_gaps.reserve(rep.gaps.size());
    for (std::size_t i = 0; i < rep.gaps.size(); ++i)
        rep.ref_gaps.push_back(rng.exponential(lambda_f));
    std::sort(rep.ref_gaps.begin(), rep.ref_gaps.end());
    rep.m = static_cast<std::int64_t>(rep.ref_gaps.size());

    rep.ks = ks_statistic_two_sample(rep.gaps, rep.ref_gaps);
    const double hi = std::max(rep.gaps.back(), rep.ref_gaps.back());
    rep.observed_hist = histogram(rep.gaps, 0.0, hi, 50);
    rep.reference_hist = histogram(rep.ref_gaps, 0.0, hi, 50);
    return rep;
}

}  // namespace touchsim
