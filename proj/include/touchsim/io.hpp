#pragma once

// File formats and serialization: the CSV event schema, order lifecycle and
// fill logs, calibration/drift/tail reports, and the flat key=value config.
// All writers produce byte-identical output for identical inputs; all event
// writes round-trip losslessly through read_events.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "calibration.hpp"
#include "core.hpp"
#include "engine.hpp"
#include "market_model.hpp"
#include "theory.hpp"

namespace touchsim {

// --- deterministic number formatting ---------------------------------------

inline std::string format_g(double x) {
    char buf[48];
    // shortest representation that parses back to exactly the same double
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// Nanosecond-lattice timestamps: nine decimals, trailing zeros trimmed down
// to one.
inline std::string format_time(double t_s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", t_s);
    std::string s(buf);
    const auto dot = s.find('.');
    const auto last = s.find_last_not_of('0');
    s.erase(std::max(last, dot + 1) + 1);
    return s;
}

inline std::string format_price(const TickGrid& grid, HalfTicks p) {
    return format_g(grid.to_external(p));
}

// --- flat key=value config ---------------------------------------------------

class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ParseError("config line " + std::to_string(line_no) +
                                 ": expected key=value");
            const std::string key = trim(t.substr(0, eq));
            if (key.empty())
                throw ParseError("config line " + std::to_string(line_no) +
                                 ": empty key");
            cfg.values_[key] = trim(t.substr(eq + 1));
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw SimError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key,
                           const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end())
            throw InvalidParams("missing config key: " + key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        return has(key) ? require_double(key) : fallback;
    }

    double require_double(const std::string& key) const {
        const std::string v = require_string(key);
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw ParseError("config key " + key + ": cannot parse number '" +
                             v + "'");
        return x;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string v = require_string(key);
        char* end = nullptr;
        const long long x = std::strtoll(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw ParseError("config key " + key + ": cannot parse integer '" +
                             v + "'");
        return x;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

// --- event files --------------------------------------------------------------

inline constexpr const char* kEventFileVersion = "touchsim-events v1";
inline constexpr const char* kEventFileColumns =
    "seq,time_s,type,best_bid,best_ask,trade_price,trade_qty,aggressor";

struct ReadResult {
    std::vector<MarketEvent> events{};
    TickGrid grid{};
    std::int64_t n_wide_spread{0};
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double_field(const std::string& v, std::size_t line_no,
                                 const char* what) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                         " '" + v + "'");
    return x;
}

inline std::int64_t parse_int_field(const std::string& v, std::size_t line_no,
                                    const char* what) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                         " '" + v + "'");
    return x;
}

// Header comments look like "# touchsim-events v1 tick_size=... [k=v ...]".
inline std::map<std::string, std::string> header_tokens(const std::string& line) {
    std::map<std::string, std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos)
            out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

}  // namespace detail

inline void write_events(const std::string& path,
                         const std::vector<MarketEvent>& events,
                         const TickGrid& grid) {
    std::string out;
    out.reserve(events.size() * 48 + 128);
    out += "# ";
    out += kEventFileVersion;
    out += " tick_size=";
    out += format_g(grid.tick_size());
    if (!events.empty()) {
        const MarketEvent& e0 = events.front();
        const HalfTicks shift = 2 * outcome_ticks(e0.move);
        out += " start_bid=";
        out += format_price(grid, e0.best_bid - shift);
        out += " start_ask=";
        out += format_price(grid, e0.best_ask - shift);
    }
    out += '\n';
    out += kEventFileColumns;
    out += '\n';
    for (const MarketEvent& ev : events) {
        out += std::to_string(ev.seq);
        out += ',';
        out += format_time(ev.time_s);
        out += ev.trade ? ",trade," : ",quote,";
        out += format_price(grid, ev.best_bid);
        out += ',';
        out += format_price(grid, ev.best_ask);
        if (ev.trade) {
            // The print that accompanies a move happens at the vanishing
            // touch: a down move prints at what is now the ask, an up move
            // at what is now the bid. Middle prints sit on the side the
            // aggressor hit.
            HalfTicks px = 0;
            switch (ev.move) {
                case MoveDirection::Down: px = ev.best_ask; break;
                case MoveDirection::Up: px = ev.best_bid; break;
                case MoveDirection::Middle:
                    px = ev.trade->aggressor == Aggressor::SellAggressor
                             ? ev.best_bid
                             : ev.best_ask;
                    break;
            }
            out += ',';
            out += format_price(grid, px);
            out += ',';
            out += std::to_string(ev.trade->qty);
            out += ',';
            out += ev.trade->aggressor == Aggressor::BuyAggressor ? 'B' : 'S';
        } else {
            out += ",,,";
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SimError("cannot open for write: " + path);
    f << out;
    if (!f) throw SimError("write failed: " + path);
}

inline ReadResult read_events(const std::string& path,
                              std::optional<TickGrid> grid_override = {}) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SimError("cannot open events file: " + path);

    std::string line;
    if (!std::getline(f, line))
        throw ParseError("empty file: " + path);
    if (line.rfind("# ", 0) != 0 ||
        line.find(kEventFileVersion) == std::string::npos)
        throw ParseError("line 1: expected '# " +
                         std::string(kEventFileVersion) + " tick_size=...'");
    const auto header = detail::header_tokens(line);

    ReadResult res;
    if (grid_override) {
        res.grid = *grid_override;
    } else {
        const auto it = header.find("tick_size");
        if (it == header.end())
            throw ParseError("line 1: header carries no tick_size and no "
                             "override was given");
        res.grid = TickGrid(detail::parse_double_field(it->second, 1, "tick_size"));
    }

    if (!std::getline(f, line))
        throw ParseError("line 2: missing column header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kEventFileColumns)
        throw ParseError("line 2: expected columns '" +
                         std::string(kEventFileColumns) + "'");

    // Pre-stream book, if recorded, anchors the first row's move direction.
    std::optional<HalfTicks> prev_sum;
    {
        const auto b = header.find("start_bid");
        const auto a = header.find("start_ask");
        if (b != header.end() && a != header.end())
            prev_sum = res.grid.to_internal(detail::parse_double_field(
                           b->second, 1, "start_bid")) +
                       res.grid.to_internal(detail::parse_double_field(
                           a->second, 1, "start_ask"));
    }

    std::size_t line_no = 2;
    std::int64_t prev_file_seq = -1;
    double prev_time = 0.0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 8)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 8 fields, got " +
                             std::to_string(fields.size()));
        MarketEvent ev;
        const std::int64_t file_seq =
            detail::parse_int_field(fields[0], line_no, "seq");
        if (file_seq <= prev_file_seq)
            throw ParseError("line " + std::to_string(line_no) +
                             ": seq not strictly increasing");
        prev_file_seq = file_seq;
        ev.seq = static_cast<std::int64_t>(res.events.size());

        ev.time_s = detail::parse_double_field(fields[1], line_no, "time_s");
        if (!res.events.empty() && ev.time_s < prev_time)
            throw NonMonotoneTime("line " + std::to_string(line_no) +
                                  ": time decreases");
        prev_time = ev.time_s;

        ev.best_bid = res.grid.to_internal(
            detail::parse_double_field(fields[3], line_no, "best_bid"));
        ev.best_ask = res.grid.to_internal(
            detail::parse_double_field(fields[4], line_no, "best_ask"));
        if (ev.best_ask <= ev.best_bid)
            throw ParseError("line " + std::to_string(line_no) +
                             ": best_ask <= best_bid");
        if (ev.best_ask - ev.best_bid != 2) ++res.n_wide_spread;

        if (fields[2] == "trade") {
            TradeMark tm;
            res.grid.to_internal(detail::parse_double_field(
                fields[5], line_no, "trade_price"));  // lattice check only
            tm.qty = detail::parse_int_field(fields[6], line_no, "trade_qty");
            if (tm.qty < 1)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": trade_qty must be >= 1");
            if (fields[7] == "B")
                tm.aggressor = Aggressor::BuyAggressor;
            else if (fields[7] == "S")
                tm.aggressor = Aggressor::SellAggressor;
            else
                throw ParseError("line " + std::to_string(line_no) +
                                 ": aggressor must be B or S");
            ev.trade = tm;
        } else if (fields[2] == "quote") {
            if (!fields[5].empty() || !fields[6].empty() || !fields[7].empty())
                throw ParseError("line " + std::to_string(line_no) +
                                 ": quote rows must leave trade fields empty");
        } else {
            throw ParseError("line " + std::to_string(line_no) +
                             ": type must be quote or trade");
        }

        const HalfTicks sum = ev.best_bid + ev.best_ask;
        if (prev_sum) {
            ev.move = sum > *prev_sum   ? MoveDirection::Up
                      : sum < *prev_sum ? MoveDirection::Down
                                        : MoveDirection::Middle;
        } else {
            ev.move = MoveDirection::Middle;
        }
        prev_sum = sum;
        res.events.push_back(ev);
    }
    return res;
}

// --- lifecycle and fill logs ---------------------------------------------------

inline void write_lifecycle(const std::string& path,
                            const std::vector<LifecycleEvent>& lifecycle,
                            const TickGrid& grid) {
    std::string out = "# touchsim-lifecycle v1 tick_size=" +
                      format_g(grid.tick_size()) + "\n";
    out += "kind,order_id,seq,time_s,price,side\n";
    for (const LifecycleEvent& le : lifecycle) {
        out += to_string(le.kind);
        out += ',';
        out += std::to_string(le.order_id);
        out += ',';
        out += std::to_string(le.seq);
        out += ',';
        out += format_time(le.time_s);
        out += ',';
        out += format_price(grid, le.price);
        out += ',';
        out += to_string(le.side);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SimError("cannot open for write: " + path);
    f << out;
}

inline std::vector<LifecycleEvent> read_lifecycle(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SimError("cannot open lifecycle file: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("# touchsim-lifecycle", 0) != 0)
        throw ParseError("line 1: expected '# touchsim-lifecycle v1 ...'");
    const auto header = detail::header_tokens(line);
    TickGrid grid;
    if (const auto it = header.find("tick_size"); it != header.end())
        grid = TickGrid(detail::parse_double_field(it->second, 1, "tick_size"));
    if (!std::getline(f, line))
        throw ParseError("line 2: missing column header");

    std::vector<LifecycleEvent> out;
    std::size_t line_no = 2;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 6)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 6 fields");
        LifecycleEvent le;
        if (fields[0] == "added")
            le.kind = LifecycleKind::Added;
        else if (fields[0] == "canceled")
            le.kind = LifecycleKind::Canceled;
        else if (fields[0] == "filled")
            le.kind = LifecycleKind::Filled;
        else
            throw ParseError("line " + std::to_string(line_no) + ": bad kind '" +
                             fields[0] + "'");
        le.order_id = detail::parse_int_field(fields[1], line_no, "order_id");
        le.seq = detail::parse_int_field(fields[2], line_no, "seq");
        le.time_s = detail::parse_double_field(fields[3], line_no, "time_s");
        le.price = grid.to_internal(
            detail::parse_double_field(fields[4], line_no, "price"));
        if (fields[5] == "buy")
            le.side = Side::Buy;
        else if (fields[5] == "sell")
            le.side = Side::Sell;
        else
            throw ParseError("line " + std::to_string(line_no) + ": bad side '" +
                             fields[5] + "'");
        out.push_back(le);
    }
    return out;
}

inline void write_fills(const std::string& path,
                        const std::vector<FillRecord>& fills,
                        const TickGrid& grid) {
    std::string out =
        "# touchsim-fills v1 tick_size=" + format_g(grid.tick_size()) + "\n";
    out += "order_id,side,fill_seq,time_s,fill_price,mid_at_fill,adverse\n";
    for (const FillRecord& fr : fills) {
        out += std::to_string(fr.order_id);
        out += ',';
        out += to_string(fr.side);
        out += ',';
        out += std::to_string(fr.fill_seq);
        out += ',';
        out += format_time(fr.time_s);
        out += ',';
        out += format_price(grid, fr.fill_price);
        out += ',';
        out += format_price(grid, fr.mid_at_fill);
        out += ',';
        out += fr.adverse ? '1' : '0';
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SimError("cannot open for write: " + path);
    f << out;
}

inline std::vector<FillRecord> read_fills(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SimError("cannot open fills file: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("# touchsim-fills", 0) != 0)
        throw ParseError("line 1: expected '# touchsim-fills v1 ...'");
    const auto header = detail::header_tokens(line);
    TickGrid grid;
    if (const auto it = header.find("tick_size"); it != header.end())
        grid = TickGrid(detail::parse_double_field(it->second, 1, "tick_size"));
    if (!std::getline(f, line))
        throw ParseError("line 2: missing column header");

    std::vector<FillRecord> out;
    std::size_t line_no = 2;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 7)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 7 fields");
        FillRecord fr;
        fr.order_id = detail::parse_int_field(fields[0], line_no, "order_id");
        if (fields[1] == "buy")
            fr.side = Side::Buy;
        else if (fields[1] == "sell")
            fr.side = Side::Sell;
        else
            throw ParseError("line " + std::to_string(line_no) + ": bad side");
        fr.fill_seq = detail::parse_int_field(fields[2], line_no, "fill_seq");
        fr.time_s = detail::parse_double_field(fields[3], line_no, "time_s");
        fr.fill_price = grid.to_internal(
            detail::parse_double_field(fields[4], line_no, "fill_price"));
        fr.mid_at_fill = grid.to_internal(
            detail::parse_double_field(fields[5], line_no, "mid_at_fill"));
        fr.adverse = fields[6] == "1";
        out.push_back(fr);
    }
    return out;
}

// --- report writers -------------------------------------------------------------

inline void write_backtest_report(const BacktestReport& rep,
                                  const std::string& technique,
                                  const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::string out;
        out += "technique=" + technique + "\n";
        out += "tick_size=" + format_g(rep.grid.tick_size()) + "\n";
        out += "n_events=" + std::to_string(rep.n_events) + "\n";
        out += "n_orders=" + std::to_string(rep.n_orders) + "\n";
        out += "n_fills=" + std::to_string(rep.n_fills) + "\n";
        out += "fill_rate=" + format_g(rep.fill_rate()) + "\n";
        out += "final_position=" + std::to_string(rep.final_position) + "\n";
        out += "final_cash_ht=" + std::to_string(rep.final_cash_ht) + "\n";
        out += "final_pnl_ht=" + std::to_string(rep.final_pnl_ht) + "\n";
        out += "final_pnl=" + format_g(rep.final_pnl_price()) + "\n";
        out += "pnl_window_s=" + format_g(rep.window_s) + "\n";
        std::ofstream f(fs::path(dir) / "summary.txt", std::ios::binary);
        if (!f) throw SimError("cannot write summary.txt in " + dir);
        f << out;
    }
    {
        std::string out = "window_index,t_start_s,pnl_ht,pnl,position\n";
        for (const WindowPoint& w : rep.pnl_windows) {
            out += std::to_string(w.index);
            out += ',';
            out += format_time(w.t_start_s);
            out += ',';
            out += std::to_string(w.pnl_ht);
            out += ',';
            out += format_g(static_cast<double>(w.pnl_ht) *
                            rep.grid.half_tick());
            out += ',';
            out += std::to_string(w.position);
            out += '\n';
        }
        std::ofstream f(fs::path(dir) / "pnl_windows.csv", std::ios::binary);
        if (!f) throw SimError("cannot write pnl_windows.csv in " + dir);
        f << out;
    }
    write_fills((fs::path(dir) / "fills.csv").string(), rep.fills, rep.grid);
    write_lifecycle((fs::path(dir) / "lifecycle.csv").string(), rep.lifecycle,
                    rep.grid);
}

inline void write_calibration(const CalibrationResult& cal,
                              const std::string& path) {
    std::string txt;
    auto kv = [&](const std::string& k, const std::string& v) {
        txt += k + "=" + v + "\n";
    };
    kv("n_intervals", std::to_string(cal.n_intervals));
    kv("interval_s", format_g(cal.interval_s));
    kv("n_steps", std::to_string(cal.umd.n_steps));
    kv("p_up", format_g(cal.umd.p_up));
    kv("se_p_up", format_g(cal.umd.se_up));
    kv("p_mid", format_g(cal.umd.p_mid));
    kv("se_p_mid", format_g(cal.umd.se_mid));
    kv("p_down", format_g(cal.umd.p_down));
    kv("se_p_down", format_g(cal.umd.se_down));
    kv("n_multi_tick", std::to_string(cal.umd.n_multi_tick));
    kv("r_f", format_g(cal.rates.r_f));
    kv("se_r_f", format_g(cal.rates.se_r_f));
    kv("n_nonadverse_exposure", std::to_string(cal.rates.n_nonadverse_exposure));
    kv("n_nonadverse_fills", std::to_string(cal.rates.n_nonadverse_fills));
    kv("p_fill_down",
       cal.rates.p_fill_down ? format_g(*cal.rates.p_fill_down) : "na");
    kv("se_p_fill_down", format_g(cal.rates.se_p_fill_down));
    kv("n_adverse_exposure", std::to_string(cal.rates.n_adverse_exposure));
    kv("n_adverse_fills", std::to_string(cal.rates.n_adverse_fills));
    if (cal.lambda) {
        kv("lambda_f", format_g(cal.lambda->lambda_f));
        kv("se_lambda_f", format_g(cal.lambda->se));
        kv("n_gaps", std::to_string(cal.lambda->n_gaps));
        kv("mean_gap_s", format_g(cal.lambda->mean_gap_s));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SimError("cannot open for write: " + path);
    f << txt;

    // Machine-readable record: one CSV row with the same fields.
    std::filesystem::path csv(path);
    csv.replace_extension(".csv");
    std::string hdr, row;
    std::istringstream lines(txt);
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        if (!first) {
            hdr += ',';
            row += ',';
        }
        hdr += line.substr(0, eq);
        row += line.substr(eq + 1);
        first = false;
    }
    std::ofstream g(csv, std::ios::binary);
    if (!g) throw SimError("cannot open for write: " + csv.string());
    g << hdr << '\n' << row << '\n';
}

inline void write_drift_stats(const DriftStats& stats, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::string out;
        out += "window_events=" + std::to_string(stats.window_events) + "\n";
        auto panel = [&](const char* name, const DriftPanel& p) {
            out += std::string(name) + "_n=" + std::to_string(p.n) + "\n";
            out += std::string(name) + "_mean_ticks=" + format_g(p.mean) + "\n";
            out += std::string(name) + "_se_ticks=" + format_g(p.se) + "\n";
        };
        panel("buy", stats.buy);
        panel("sell", stats.sell);
        panel("control", stats.control);
        std::ofstream f(fs::path(dir) / "drift_summary.txt", std::ios::binary);
        if (!f) throw SimError("cannot write drift_summary.txt in " + dir);
        f << out;
    }
    auto write_panel = [&](const char* name, const DriftPanel& p) {
        std::string out = "index,sample_ticks,cumsum_ticks\n";
        double c = 0.0;
        for (std::size_t i = 0; i < p.samples.size(); ++i) {
            c += p.samples[i];
            out += std::to_string(i);
            out += ',';
            out += format_g(p.samples[i]);
            out += ',';
            out += format_g(c);
            out += '\n';
        }
        std::ofstream f(fs::path(dir) / (std::string("drift_") + name + ".csv"),
                        std::ios::binary);
        if (!f) throw SimError("cannot write drift panel in " + dir);
        f << out;
    };
    write_panel("buy", stats.buy);
    write_panel("sell", stats.sell);
    write_panel("control", stats.control);

    // Shared integer-tick bins across the three panels.
    double lo = 0.0, hi = 0.0;
    for (const DriftPanel* p : {&stats.buy, &stats.sell, &stats.control})
        for (double x : p->samples) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    const auto bins = static_cast<std::size_t>(hi - lo) + 1;
    const Histogram hb = histogram(stats.buy.samples, lo - 0.5, hi + 0.5, bins);
    const Histogram hs = histogram(stats.sell.samples, lo - 0.5, hi + 0.5, bins);
    const Histogram hc =
        histogram(stats.control.samples, lo - 0.5, hi + 0.5, bins);
    std::string out = "ticks,buy,sell,control\n";
    for (std::size_t k = 0; k < bins; ++k) {
        out += format_g(lo + static_cast<double>(k));
        out += ',';
        out += std::to_string(hb.counts[k]);
        out += ',';
        out += std::to_string(hs.counts[k]);
        out += ',';
        out += std::to_string(hc.counts[k]);
        out += '\n';
    }
    std::ofstream f(fs::path(dir) / "drift_hist.csv", std::ios::binary);
    if (!f) throw SimError("cannot write drift_hist.csv in " + dir);
    f << out;
}

inline void write_tail_report(const TailReport& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::string out;
        out += "n_gaps=" + std::to_string(rep.n) + "\n";
        out += "n_reference=" + std::to_string(rep.m) + "\n";
        out += "ks_statistic=" + format_g(rep.ks) + "\n";
        out += "threshold_5pct=" +
               format_g(ks_two_sample_threshold(0.05, rep.n, rep.m)) + "\n";
        out += "threshold_1pct=" +
               format_g(ks_two_sample_threshold(0.01, rep.n, rep.m)) + "\n";
        out += std::string("rejects_5pct=") + (rep.rejects(0.05) ? "1" : "0") +
               "\n";
        out += std::string("rejects_1pct=") + (rep.rejects(0.01) ? "1" : "0") +
               "\n";
        std::ofstream f(fs::path(dir) / "tail_summary.txt", std::ios::binary);
        if (!f) throw SimError("cannot write tail_summary.txt in " + dir);
        f << out;
    }
    std::string out = "bin_lo,bin_hi,observed,reference\n";
    const double w = rep.observed_hist.bin_width();
    for (std::size_t k = 0; k < rep.observed_hist.counts.size(); ++k) {
        out += format_g(rep.observed_hist.lo + w * static_cast<double>(k));
        out += ',';
        out += format_g(rep.observed_hist.lo + w * static_cast<double>(k + 1));
        out += ',';
        out += std::to_string(rep.observed_hist.counts[k]);
        out += ',';
        out += std::to_string(rep.reference_hist.counts[k]);
        out += '\n';
    }
    std::ofstream f(fs::path(dir) / "tail_hist.csv", std::ios::binary);
    if (!f) throw SimError("cannot write tail_hist.csv in " + dir);
    f << out;
}

}  // namespace touchsim
