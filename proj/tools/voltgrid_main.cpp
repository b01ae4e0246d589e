#include "CLI11.hpp"

#include "voltgrid/backtest.hpp"
#include "voltgrid/config.hpp"
#include "voltgrid/connector.hpp"
#include "voltgrid/engine.hpp"
#include "voltgrid/errors.hpp"
#include "voltgrid/ingest.hpp"
#include "voltgrid/jsonl.hpp"
#include "voltgrid/optimize.hpp"
#include "voltgrid/report.hpp"
#include "voltgrid/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace voltgrid;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kAcceptanceFailure = 3;
constexpr int kConnectivityTerminal = 4;

nlohmann::ordered_json event_to_json(const EngineEvent& e) {
    return {{"kind", e.kind},
            {"pair", e.pair},
            {"at_ms", e.at_ms},
            {"magnitude", e.magnitude.str()},
            {"note", e.note}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string base_dir_of(const std::string& config_path) {
    fs::path parent = fs::path(config_path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Writes the full artifact set of one executed run into `dir`. Latency goes
/// to its own file: it is wall-clock measurement, the only artifact that is
/// not a pure function of (config, data).
void write_run_artifacts(const fs::path& dir, const RunConfig& run,
                         const BacktestConfig& cfg, const BacktestResult& r) {
    fs::create_directories(dir);
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& f : r.fills) rows.push_back(fill_to_json(f));
    write_jsonl((dir / "trades.jsonl").string(), rows);
    write_jsonl((dir / "actions.jsonl").string(), r.action_log);
    rows.clear();
    for (const auto& e : r.events) rows.push_back(event_to_json(e));
    write_jsonl((dir / "events.jsonl").string(), rows);

    std::string eq = "timestamp,equity\n";
    for (const auto& [t, v] : r.equity) {
        eq += std::to_string(t) + "," + v.str() + "\n";
    }
    write_text(dir / "equity.csv", eq);

    write_json_file((dir / "feedback.json").string(),
                    feedback_to_json(r.feedback));

    nlohmann::ordered_json meta;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& [pair, s] : cfg.series) {
        (void)s;
        pairs.push_back(pair);
    }
    meta["pairs"] = pairs;
    meta["capital_per_pair"] = cfg.params.capital_per_pair.str();
    meta["annualization_days"] = cfg.annualization_days;
    meta["cycle_ms"] = cfg.cycle_ms;
    meta["period_start"] = cfg.start_ms;
    meta["period_end"] = cfg.end_ms;
    meta["market_profile"] = run.market_profile;
    write_json_file((dir / "run.json").string(), meta);

    nlohmann::ordered_json lat;
    lat["cycles_measured"] = r.step_latency_ms.size();
    lat["median_ms"] = median_of(r.step_latency_ms);
    lat["max_ms"] = r.step_latency_ms.empty()
        ? 0.0
        : *std::max_element(r.step_latency_ms.begin(), r.step_latency_ms.end());
    write_json_file((dir / "latency.json").string(), lat);
}

int cmd_ingest(const std::string& in_path, const std::string& pair,
               std::int64_t interval_s, const std::string& out_path) {
    PairSeries series = load_series_file(in_path, pair, interval_s);
    save_series_file(series, out_path);
    std::cout << "ingested " << series.candles.size() << " bars of " << pair
              << " (interval " << series.interval_s << "s) -> " << out_path
              << "\n";
    return kOk;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_path) {
    PairSeries series = generate_series(spec);
    save_series_file(series, out_path);
    std::cout << "generated " << series.candles.size() << " bars (" << spec.kind
              << ") -> " << out_path << "\n";
    return kOk;
}

int cmd_backtest(const RunConfig& run, const BacktestConfig& cfg,
                 const fs::path& out_dir) {
    BacktestResult r = run_backtest(cfg);
    write_run_artifacts(out_dir, run, cfg, r);
    std::cout << "backtest complete: " << r.fills.size() << " fills, "
              << r.action_log.size() << " actions -> " << out_dir.string()
              << "\n";
    return kOk;
}

int cmd_paper_trade(const RunConfig& run, const BacktestConfig& cfg,
                    const fs::path& out_dir, std::int64_t restart_at) {
    const std::int64_t total =
        cfg.cycle_ms > 0 ? (cfg.end_ms - cfg.start_ms) / cfg.cycle_ms : 0;
    if (restart_at >= 0 && restart_at > total) {
        throw ConfigError("--restart-at is past the end of the run (" +
                          std::to_string(total) + " cycles)");
    }

    FixtureConnector connector(cfg.sim, cfg.series, cfg.pair_info);
    TradeLoopOptions options;
    options.retry = run.retry;
    options.on_advance = [&connector](std::int64_t from, std::int64_t to) {
        connector.advance(from, to);
    };

    BacktestResult merged;
    if (restart_at < 0) {
        merged = run_trade_loop(cfg, connector, options);
    } else {
        TradeLoopOptions first = options;
        first.end_cycle = restart_at;
        BacktestResult a = run_trade_loop(cfg, connector, first);
        // Process boundary: every in-memory structure from the first life is
        // dropped here. Only the connector — the venue — carries state over.
        TradeLoopOptions second = options;
        second.first_cycle = restart_at;
        BacktestResult b = run_trade_loop(cfg, connector, second);

        merged.fills = connector.trade_log();
        merged.equity = a.equity;
        merged.equity.insert(merged.equity.end(), b.equity.begin(),
                             b.equity.end());
        merged.action_log = a.action_log;
        merged.action_log.insert(merged.action_log.end(), b.action_log.begin(),
                                 b.action_log.end());
        merged.events = a.events;
        merged.events.insert(merged.events.end(), b.events.begin(),
                             b.events.end());
        merged.step_latency_ms = a.step_latency_ms;
        merged.step_latency_ms.insert(merged.step_latency_ms.end(),
                                      b.step_latency_ms.begin(),
                                      b.step_latency_ms.end());
        merged.grid_context = a.grid_context;
        for (const auto& [pair, ctx] : b.grid_context) {
            merged.grid_context.emplace(pair, ctx);
        }
        merged.utilization = a.utilization;
        for (const auto& [pair, samples] : b.utilization) {
            auto& dst = merged.utilization[pair];
            dst.insert(dst.end(), samples.begin(), samples.end());
        }
        merged.feedback = feedback_from_run(
            cfg, cfg.start_ms, cfg.end_ms, merged.fills, merged.equity,
            merged.events, merged.grid_context, merged.utilization);
    }

    write_run_artifacts(out_dir, run, cfg, merged);
    std::cout << "paper trade complete: " << merged.fills.size() << " fills, "
              << merged.action_log.size() << " actions -> " << out_dir.string()
              << "\n";
    return kOk;
}

int cmd_optimize(const RunConfig& run, const BacktestConfig& cfg,
                 const fs::path& out_dir) {
    OptimizeRequest req;
    req.base = cfg;
    req.objective = run.objective;
    req.budget = run.budget;
    req.optimizer = run.optimizer;
    OptimizeOutcome outcome = run_optimization(req);

    fs::create_directories(out_dir);
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& c : outcome.cycles) rows.push_back(cycle_to_json(c));
    write_jsonl((out_dir / "cycles.jsonl").string(), rows);
    write_json_file((out_dir / "final_params.json").string(),
                    params_to_json(outcome.final_params));
    write_json_file((out_dir / "final_feedback.json").string(),
                    feedback_to_json(outcome.final_feedback));
    write_text(out_dir / "constraints.txt",
               describe_constraints(outcome.active_constraints,
                                    layout_for(outcome.final_params)));
    nlohmann::ordered_json summary;
    summary["verdict"] = outcome.verdict;
    summary["accepted"] = outcome.accepted;
    summary["cycles"] = outcome.cycles.size();
    summary["active_constraints"] = outcome.active_constraints.size();
    write_json_file((out_dir / "outcome.json").string(), summary);

    std::cout << "optimization " << outcome.verdict << " after "
              << outcome.cycles.size() << " cycle(s) -> " << out_dir.string()
              << "\n";
    return outcome.accepted ? kOk : kAcceptanceFailure;
}

int cmd_report(const fs::path& in_dir, const fs::path& out_dir) {
    const fs::path run_path = in_dir / "run.json";
    const fs::path feedback_path = in_dir / "feedback.json";
    const fs::path trades_path = in_dir / "trades.jsonl";
    const fs::path equity_path = in_dir / "equity.csv";
    for (const fs::path& p :
         {run_path, feedback_path, trades_path, equity_path}) {
        if (!fs::exists(p)) {
            throw ConfigError("missing report input: " + p.string());
        }
    }

    nlohmann::json meta = read_json_file(run_path.string());
    ReportInputs in;
    in.feedback = feedback_from_json(read_json_file(feedback_path.string()));
    for (const auto& row : read_jsonl(trades_path.string())) {
        in.fills.push_back(fill_from_json(row));
    }
    std::ifstream eq(equity_path);
    std::string line;
    std::getline(eq, line); // header
    while (std::getline(eq, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("malformed equity row: " + line);
        }
        in.equity.emplace_back(std::stoll(line.substr(0, comma)),
                               Fixed::parse(line.substr(comma + 1)));
    }
    for (const auto& p : meta.at("pairs")) {
        in.pairs.push_back(p.get<std::string>());
    }
    in.capital_per_pair =
        Fixed::parse(meta.at("capital_per_pair").get<std::string>());
    in.annualization_days = meta.at("annualization_days").get<double>();

    ReportTables tables = build_report(in);
    fs::create_directories(out_dir);
    write_text(out_dir / "report.csv", tables.metrics_csv);
    write_json_file((out_dir / "transactions.json").string(),
                    tables.transactions);
    write_text(out_dir / "equity_curve.csv", tables.equity_csv);
    std::cout << "report written -> " << out_dir.string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"volatility-adaptive grid trading toolkit"};
    app.require_subcommand(1);

    // ---- ingest ----
    std::string ingest_in, ingest_pair, ingest_out;
    std::int64_t ingest_interval = 0;
    auto* ingest = app.add_subcommand(
        "ingest", "validate a candle file and write it in canonical form");
    ingest->add_option("--in", ingest_in, "input .csv or .jsonl file")
        ->required();
    ingest->add_option("--pair", ingest_pair, "pair id, e.g. BTC/USDT")
        ->required();
    ingest->add_option("--interval-s", ingest_interval,
                       "bar interval in seconds (0 infers from data)");
    ingest->add_option("--out", ingest_out, "output .csv or .jsonl file")
        ->required();

    // ---- synth ----
    SyntheticSpec spec;
    std::string synth_out;
    double synth_base_price = 100.0;
    double synth_volume = 50'000.0;
    auto* synth = app.add_subcommand(
        "synth", "generate a seeded synthetic candle series");
    synth->add_option("--kind", spec.kind,
                      "mean_revert | crash | surge | trend | multi_regime");
    synth->add_option("--pair", spec.pair_id, "pair id for the series");
    synth->add_option("--start-ms", spec.start_ms, "first bar open time");
    synth->add_option("--interval-s", spec.interval_s, "bar interval seconds");
    synth->add_option("--bars", spec.bars, "number of bars");
    synth->add_option("--event-bars", spec.event_bars,
                      "bars the crash/surge move spans");
    synth->add_option("--base-price", synth_base_price, "starting price");
    synth->add_option("--amplitude", spec.amplitude, "regime move size");
    synth->add_option("--noise", spec.noise, "per-bar relative noise");
    synth->add_option("--volume", synth_volume, "average bar volume");
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--out", synth_out, "output .csv or .jsonl file")
        ->required();

    // ---- shared run options ----
    std::string config_path, out_dir_flag;
    std::int64_t restart_at = -1;
    std::int64_t flag_start = -1, flag_end = -1, flag_cycle = -1;
    std::uint64_t flag_faults_seed = 0;
    bool has_faults_seed = false;

    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run config JSON file")
            ->required();
        cmd->add_option("--out-dir", out_dir_flag,
                        "artifact directory (overrides config out_dir)");
        cmd->add_option("--start-ms", flag_start, "override config start_ms");
        cmd->add_option("--end-ms", flag_end, "override config end_ms");
        cmd->add_option("--cycle-ms", flag_cycle, "override config cycle_ms");
        cmd->add_option_function<std::uint64_t>(
            "--faults-seed",
            [&](std::uint64_t v) {
                flag_faults_seed = v;
                has_faults_seed = true;
            },
            "override sim fault seed");
    };

    auto* backtest =
        app.add_subcommand("backtest", "replay the strategy over recorded data");
    add_run_options(backtest);
    auto* optimize = app.add_subcommand(
        "optimize", "run the closed replay-detect-constrain-resolve loop");
    add_run_options(optimize);
    auto* paper = app.add_subcommand(
        "paper-trade", "drive the trading loop against the fixture venue");
    add_run_options(paper);
    paper->add_option("--restart-at", restart_at,
                      "kill and restart the process at this cycle boundary");

    // ---- report ----
    std::string report_in, report_out;
    auto* report = app.add_subcommand(
        "report", "derive metric tables and plot series from run artifacts");
    report->add_option("--in-dir", report_in, "artifact directory")->required();
    report->add_option("--out-dir", report_out,
                       "output directory (defaults to --in-dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            return cmd_ingest(ingest_in, ingest_pair, ingest_interval,
                              ingest_out);
        }
        if (synth->parsed()) {
            spec.base_price = Fixed::from_double(synth_base_price);
            spec.bar_volume = Fixed::from_double(synth_volume);
            return cmd_synth(spec, synth_out);
        }
        if (report->parsed()) {
            fs::path in_dir(report_in);
            fs::path out_dir(report_out.empty() ? report_in : report_out);
            return cmd_report(in_dir, out_dir);
        }

        RunConfig run = load_run_config(config_path);
        if (flag_start >= 0) run.start_ms = flag_start;
        if (flag_end >= 0) run.end_ms = flag_end;
        if (flag_cycle >= 0) run.cycle_ms = flag_cycle;
        if (has_faults_seed) run.sim.faults.seed = flag_faults_seed;
        if (!out_dir_flag.empty()) run.out_dir = out_dir_flag;
        BacktestConfig cfg = to_backtest_config(run, base_dir_of(config_path));
        fs::path out_dir(run.out_dir);

        if (backtest->parsed()) return cmd_backtest(run, cfg, out_dir);
        if (optimize->parsed()) return cmd_optimize(run, cfg, out_dir);
        if (paper->parsed()) {
            return cmd_paper_trade(run, cfg, out_dir, restart_at);
        }
        std::cerr << "no command selected\n";
        return kConfigError;
    } catch (const FaultError& e) {
        std::cerr << "connectivity terminal: " << e.what() << "\n";
        return kConnectivityTerminal;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kConfigError;
    } catch (const GapError& e) {
        std::cerr << "data gap: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
