// touchsim command line: simulate streams, print closed-form drift numbers,
// calibrate parameters from recorded streams, run backtests, compare fill
// techniques, and measure post-fill drift.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "touchsim/touchsim.hpp"

namespace fs = std::filesystem;
using namespace touchsim;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ModelParams model_params_from(const KeyValueConfig& cfg) {
    ModelParams p;
    p.p_up = cfg.get_double("p_up", 0.0173);
    p.p_mid = cfg.get_double("p_mid", 0.965);
    p.p_down = cfg.get_double("p_down", 0.0173);
    p.r_f = cfg.get_double("r_f", 0.018);
    p.p_fill_down = cfg.get_double("p_fill_down", 1.0);
    return p;
}

GchpParams gchp_params_from(const KeyValueConfig& cfg) {
    GchpParams g;
    g.p_uu = cfg.get_double("p_uu", 0.6);
    g.p_du = cfg.get_double("p_du", 0.4);
    g.p_ud = cfg.get_double("p_ud", 0.4);
    g.p_dd = cfg.get_double("p_dd", 0.6);
    g.hawkes.mu = cfg.get_double("mu", 0.5);
    g.hawkes.alpha = cfg.get_double("alpha", 0.0);
    g.hawkes.beta = cfg.get_double("beta", 1.0);
    return g;
}

ChainState start_state_from(const KeyValueConfig& cfg) {
    const std::string s = cfg.get_string("gchp_start_state", "up");
    if (s == "up") return ChainState::Up;
    if (s == "down") return ChainState::Down;
    throw UsageError("gchp_start_state must be 'up' or 'down', got '" + s + "'");
}

FillTechnique technique_from(const std::string& name,
                             const KeyValueConfig& cfg) {
    if (name == "1" || name == "always-on-trade") return AlwaysFillOnTrade{};
    if (name == "2" || name == "exponential-queue")
        return ExponentialFill{cfg.get_double("lambda_f", 0.0842)};
    if (name == "3" || name == "adverse-bernoulli")
        return AdverseBernoulli{cfg.get_double("r_f", 0.018),
                                cfg.get_double("p_fill_down", 1.0)};
    if (name == "ground-truth" || name == "4")
        return GroundTruthFills{
            cfg.get_double("p_fill_down", 0.99),
            HawkesParams{cfg.get_double("fill_mu", 0.02),
                         cfg.get_double("fill_alpha", 0.0),
                         cfg.get_double("fill_beta", 1.0)}};
    throw UsageError("unknown technique '" + name +
                     "' (use 1|2|3|ground-truth or a technique name)");
}

KeyValueConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return KeyValueConfig::parse_file(path);
}

int cmd_simulate(const std::string& config_path, std::string model,
                 std::int64_t steps, std::uint64_t seed,
                 const std::string& out) {
    if (steps <= 0) throw UsageError("--steps must be a positive count");
    const auto cfg = load_config(config_path);
    if (model.empty()) model = cfg.get_string("model", "umd");

    const TickGrid grid(cfg.get_double("tick_size", 0.015625));
    const HalfTicks start_mid =
        grid.to_internal(cfg.get_double("start_mid", 110.5390625));

    std::vector<MarketEvent> events;
    if (model == "umd") {
        const ModelParams p = model_params_from(cfg);
        events = simulate_umd(p, steps, cfg.get_double("dt_s", 1.0), start_mid,
                              seed);
    } else if (model == "gchp") {
        const GchpParams g = gchp_params_from(cfg);
        events = simulate_gchp_n(g, steps, start_state_from(cfg), start_mid,
                                 seed);
    } else {
        throw UsageError("unknown model '" + model + "' (use umd or gchp)");
    }
    attach_trades(events,
                  TradeFlowParams{cfg.get_double("p_trade_on_mid", 0.05)},
                  seed);
    write_events(out, events, grid);
    std::cout << "wrote " << events.size() << " events to " << out << "\n";
    return 0;
}

int cmd_theory(const std::string& config_path, std::string model) {
    const auto cfg = load_config(config_path);
    if (model.empty()) model = cfg.get_string("model", "umd");

    DriftReport rep;
    if (model == "umd") {
        rep = make_drift_report(model_params_from(cfg));
    } else if (model == "gchp") {
        rep = make_drift_report(gchp_params_from(cfg),
                                cfg.get_double("r_f", 0.018));
    } else {
        throw UsageError("unknown model '" + model + "' (use umd or gchp)");
    }
    std::cout << "model=" << model << "\n"
              << "drift_given_fill_ticks=" << format_g(rep.drift_given_fill_ticks)
              << "\n"
              << "fill_probability=" << format_g(rep.fill_probability) << "\n"
              << "drift_unconditional_ticks="
              << format_g(rep.drift_unconditional_ticks) << "\n";
    return 0;
}

int cmd_calibrate(const std::string& events_path,
                  const std::string& lifecycle_path, double resample_s,
                  const std::string& out) {
    if (!(resample_s > 0.0))
        throw UsageError("--resample must be a positive interval in seconds");
    const ReadResult r = read_events(events_path);

    CalibrationResult cal;
    if (!lifecycle_path.empty()) {
        cal = calibrate(r.events, read_lifecycle(lifecycle_path), resample_s);
    } else {
        // no order history: move frequencies only
        const auto intervals = resample(r.events, resample_s);
        cal.umd = estimate_umd(intervals);
        cal.n_intervals = static_cast<std::int64_t>(intervals.size());
        cal.interval_s = resample_s;
    }
    write_calibration(cal, out);
    std::cout << "calibrated " << cal.n_intervals << " intervals to " << out
              << "\n";
    return 0;
}

int cmd_backtest(const std::string& events_path, const std::string& technique,
                 const std::string& config_path, std::uint64_t seed,
                 const std::string& out) {
    const auto cfg = load_config(config_path);
    const ReadResult r = read_events(events_path);
    const FillTechnique tech = technique_from(technique, cfg);
    const auto rep = run_backtest(r.events, r.grid, tech,
                                  cfg.get_double("pnl_window_s", 300.0), seed);
    write_backtest_report(rep, technique_name(tech), out);
    std::cout << "technique " << technique_name(tech) << ": " << rep.n_orders
              << " orders, " << rep.n_fills << " fills, final pnl "
              << format_g(rep.final_pnl_price()) << " -> " << out << "\n";
    return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& arg) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= arg.size()) {
        const auto pos = arg.find(',', start);
        const std::string tok = arg.substr(
            start, pos == std::string::npos ? std::string::npos : pos - start);
        if (tok.empty()) throw UsageError("bad --seeds list: '" + arg + "'");
        char* end = nullptr;
        const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0')
            throw UsageError("bad seed '" + tok + "'");
        seeds.push_back(v);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (seeds.empty()) throw UsageError("--seeds needs at least one seed");
    return seeds;
}

int cmd_compare(const std::string& events_path, const std::string& config_path,
                const std::string& seeds_arg, const std::string& out_dir) {
    const auto cfg = load_config(config_path);
    const ReadResult r = read_events(events_path);
    const auto seeds = parse_seeds(seeds_arg);
    const double window_s = cfg.get_double("pnl_window_s", 300.0);

    fs::create_directories(out_dir);
    const std::vector<std::string> names{"1", "2", "3", "ground-truth"};

    std::string table = "technique,seed,n_orders,n_fills,fill_rate,final_pnl_ht,final_pnl\n";
    std::string summary;
    for (const auto& name : names) {
        const FillTechnique tech = technique_from(name, cfg);
        double sum_fills = 0.0, sum_rate = 0.0, sum_pnl = 0.0;
        for (const auto seed : seeds) {
            const auto rep = run_backtest(r.events, r.grid, tech, window_s, seed);
            table += technique_name(tech);
            table += ',' + std::to_string(seed);
            table += ',' + std::to_string(rep.n_orders);
            table += ',' + std::to_string(rep.n_fills);
            table += ',' + format_g(rep.fill_rate());
            table += ',' + std::to_string(rep.final_pnl_ht);
            table += ',' + format_g(rep.final_pnl_price());
            table += '\n';
            sum_fills += static_cast<double>(rep.n_fills);
            sum_rate += rep.fill_rate();
            sum_pnl += rep.final_pnl_price();

            std::string windows = "window_index,t_start_s,pnl_ht,pnl,position\n";
            for (const auto& w : rep.pnl_windows) {
                windows += std::to_string(w.index);
                windows += ',' + format_time(w.t_start_s);
                windows += ',' + std::to_string(w.pnl_ht);
                windows += ',' + format_g(static_cast<double>(w.pnl_ht) *
                                          rep.grid.half_tick());
                windows += ',' + std::to_string(w.position);
                windows += '\n';
            }
            std::ofstream wf(fs::path(out_dir) /
                                 ("pnl_" + technique_name(tech) + "_seed" +
                                  std::to_string(seed) + ".csv"),
                             std::ios::binary);
            if (!wf) throw SimError("cannot write window series in " + out_dir);
            wf << windows;
        }
        const auto n = static_cast<double>(seeds.size());
        summary += technique_name(tech) + "_mean_fills=" +
                   format_g(sum_fills / n) + "\n";
        summary += technique_name(tech) + "_mean_fill_rate=" +
                   format_g(sum_rate / n) + "\n";
        summary += technique_name(tech) + "_mean_final_pnl=" +
                   format_g(sum_pnl / n) + "\n";
    }
    {
        std::ofstream f(fs::path(out_dir) / "comparison.csv", std::ios::binary);
        if (!f) throw SimError("cannot write comparison.csv in " + out_dir);
        f << table;
    }
    {
        std::ofstream f(fs::path(out_dir) / "summary.txt", std::ios::binary);
        if (!f) throw SimError("cannot write summary.txt in " + out_dir);
        f << summary;
    }
    std::cout << "compared " << names.size() << " techniques over "
              << seeds.size() << " seed(s) -> " << out_dir << "\n";
    return 0;
}

int cmd_drift(const std::string& report_path, const std::string& events_path,
              std::int64_t window, const std::string& out_dir) {
    if (window < 1) throw UsageError("--window must be a positive event count");
    const ReadResult r = read_events(events_path);

    fs::path fills_path(report_path);
    if (fs::is_directory(fills_path)) fills_path /= "fills.csv";
    BacktestReport rep;
    rep.grid = r.grid;
    rep.fills = read_fills(fills_path.string());
    rep.n_fills = static_cast<std::int64_t>(rep.fills.size());

    const auto stats = drift_after_fills(rep, r.events, window);
    write_drift_stats(stats, out_dir);
    std::cout << "drift over " << window << " events: buy "
              << format_g(stats.buy.mean) << " ticks (n=" << stats.buy.n
              << "), sell " << format_g(stats.sell.mean)
              << " ticks (n=" << stats.sell.n << ") -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"event-driven simulator and backtester for at-the-touch "
                 "market making on a discrete price grid"};
    app.require_subcommand(1);

    std::string config_path, model, events_path, lifecycle_path, technique,
        report_path, out, seeds_arg;
    std::int64_t steps = 0, window = 100;
    std::uint64_t seed = 1;
    double resample_s = 1.0;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic event stream");
    sim->add_option("--config", config_path, "key=value parameter file");
    sim->add_option("--model", model, "umd or gchp (default from config)");
    sim->add_option("--steps", steps, "number of events")->required();
    sim->add_option("--seed", seed, "rng seed");
    sim->add_option("--out", out, "output events file")->required();

    auto* theory = app.add_subcommand("theory", "print closed-form drift numbers");
    theory->add_option("--config", config_path, "key=value parameter file");
    theory->add_option("--model", model, "umd or gchp (default from config)");

    auto* cal = app.add_subcommand("calibrate", "estimate parameters from a stream");
    cal->add_option("--events", events_path, "events file")->required();
    cal->add_option("--lifecycle", lifecycle_path, "order lifecycle file");
    cal->add_option("--resample", resample_s, "interval seconds (default 1)");
    cal->add_option("--out", out, "output report path")->required();

    auto* bt = app.add_subcommand("backtest", "run one technique over a stream");
    bt->add_option("--events", events_path, "events file")->required();
    bt->add_option("--technique", technique, "1|2|3|ground-truth")->required();
    bt->add_option("--config", config_path, "key=value parameter file");
    bt->add_option("--seed", seed, "rng seed");
    bt->add_option("--out", out, "output report directory")->required();

    auto* cmp = app.add_subcommand("compare", "run all techniques over a stream");
    cmp->add_option("--events", events_path, "events file")->required();
    cmp->add_option("--config", config_path, "key=value parameter file");
    cmp->add_option("--seeds", seeds_arg, "comma-separated seed list")
        ->default_val("1");
    cmp->add_option("--out", out, "output directory")->required();

    auto* dr = app.add_subcommand("drift", "post-fill drift statistics");
    dr->add_option("--report", report_path, "report directory or fills file")
        ->required();
    dr->add_option("--events", events_path, "events file")->required();
    dr->add_option("--window", window, "window length in events (default 100)");
    dr->add_option("--out", out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(sim))
            return cmd_simulate(config_path, model, steps, seed, out);
        if (app.got_subcommand(theory)) return cmd_theory(config_path, model);
        if (app.got_subcommand(cal))
            return cmd_calibrate(events_path, lifecycle_path, resample_s, out);
        if (app.got_subcommand(bt))
            return cmd_backtest(events_path, technique, config_path, seed, out);
        if (app.got_subcommand(cmp))
            return cmd_compare(events_path, config_path, seeds_arg, out);
        if (app.got_subcommand(dr))
            return cmd_drift(report_path, events_path, window, out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}
