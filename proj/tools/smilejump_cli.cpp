// smilejump: command-line driver for the jump / smile-dynamics pipeline.
//
//   smilejump synth --out data --days 300 --jump-days 60
//   smilejump run-all --underlying data/underlying.csv --options data/options --out out
//
// Every stage can also run on its own and reload the previous stage's CSVs
// from --out (detect-jumps, surfaces -> pca -> study).

#include "smilejump/parallel.hpp"
#include "smilejump/pipeline.hpp"
#include "smilejump/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

using namespace smilejump;

namespace {

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" []");
        const auto e = item.find_last_not_of(" []");
        if (b == std::string::npos) continue;
        out.push_back(parse_double(item.substr(b, e - b + 1)));
    }
    return out;
}

int parse_clock(const std::string& text) {
    const Timestamp ts = parse_timestamp("2000-01-03T" + text);
    return ts.minute;
}

struct Options {
    RunConfig run;
    std::string maturities = "0.25,0.5,0.75";
    std::string morning_first = "09:31";
    std::string morning_last = "10:30";
    std::string calibration = "simulated";
    std::string pvalues = "automatic";

    MarketSpec market;
    fs::path synth_out = "synthetic";
    std::string first_day = "2006-01-03";

    RunConfig resolve() const {
        RunConfig cfg = run;
        cfg.maturities = parse_list(maturities);
        cfg.morning_first = parse_clock(morning_first);
        cfg.morning_last = parse_clock(morning_last);
        cfg.calibration = calibration == "gumbel" ? ThresholdCalibration::gumbel : ThresholdCalibration::simulated;
        cfg.pvalues = pvalues == "exact"        ? PValueMode::exact
                      : pvalues == "asymptotic" ? PValueMode::asymptotic
                                                : PValueMode::automatic;
        cfg.seed = market.seed;
        cfg.validate();
        return cfg;
    }
};

void print_report_summary(const TestReport& r) {
    std::printf("days: jump=%zu nojump=%zu excluded=%zu\n", r.jump_days, r.nojump_days, r.excluded_days);
    std::printf("%-6s %-3s %-9s %-6s %-6s %-6s %-6s\n", "tau", "pc", "region", "M:KS", "M:WU", "S:KS", "S:WU");
    for (const auto& c : r.components) {
        std::printf("%-6s %-3d %-9s %-6c %-6c %-6c %-6c\n", maturity_label(c.info.tau).c_str(), c.info.pc,
                    to_string(c.info.region), c.mean.ks_symbol, c.mean.welch_symbol, c.var.ks_symbol,
                    c.var.welch_symbol);
    }
}

void cmd_synth(const Options& o) {
    const SyntheticMarket market(o.market);
    const fs::path dir = o.synth_out;
    write_underlying_csv(dir / "underlying.csv", market.underlying());
    for (std::size_t d = 0; d < market.days().size(); ++d) {
        const auto quotes = market.chain_day(d);
        write_text(dir / "options" / ("options_" + format_date(market.days()[d]) + ".csv"), options_csv(quotes));
    }
    std::string truth = "timestamp,log_size\n";
    for (const auto& j : market.true_jumps()) truth += format_timestamp(j.timestamp) + ',' + format_double(j.log_size) + '\n';
    write_text(dir / "true_jumps.csv", truth);
    std::string groups = "day,group\n";
    for (std::size_t d = 0; d < market.days().size(); ++d) {
        groups += format_date(market.days()[d]) + ',' + to_string(market.true_groups()[d]) + '\n';
    }
    write_text(dir / "true_days.csv", groups);
    std::printf("wrote %zu days, %zu true jumps to %s\n", market.days().size(), market.true_jumps().size(),
                dir.string().c_str());
}

void cmd_ingest(const RunConfig& cfg) {
    const IngestedMarket m = ingest(cfg);
    write_text(cfg.output_dir / "ingest_report.json", m.report.to_json());
    std::printf("rows read %zu, accepted %zu, rejected %zu, days %zu\n", m.report.rows_read, m.report.rows_accepted,
                m.report.rejected_total(), m.report.days_covered);
    for (const auto& [reason, n] : m.report.rejected) std::printf("  %s: %zu\n", reason.c_str(), n);
}

void cmd_detect(const RunConfig& cfg) {
    if (cfg.underlying_csv.empty() || !fs::is_regular_file(cfg.underlying_csv)) {
        throw ConfigError("underlying CSV not found: " + cfg.underlying_csv.string());
    }
    IngestReport rep;
    const PriceSeries s = read_underlying_csv(cfg.underlying_csv, rep);
    const JumpStage j = run_jumps(s, cfg);
    write_jump_artifacts(j, cfg);
    std::printf("%zu events at %d-min (beta*=%.6g), %zu at %d-min; days jump=%zu nojump=%zu excluded=%zu\n",
                j.primary.events.size(), j.primary.test.sampling_minutes, j.primary.beta_star,
                j.secondary.events.size(), j.secondary.test.sampling_minutes,
                j.partition.count(DayGroup::jump_morning), j.partition.count(DayGroup::no_jump),
                j.partition.count(DayGroup::excluded));
}

void cmd_surfaces(const RunConfig& cfg) {
    IngestedMarket m = ingest(cfg);
    const SurfaceStage s = run_surfaces(m.underlying, chain_from_quotes(m.underlying, m.quotes), cfg);
    m.report.minutes_with_surfaces = s.minutes_with_surfaces;
    write_surface_artifacts(s, cfg);
    write_text(cfg.output_dir / "ingest_report.json", m.report.to_json());
    std::printf("%zu minutes, %zu with every maturity\n", s.minutes, s.minutes_with_surfaces);
}

void cmd_pca(const RunConfig& cfg) {
    SurfaceStage s;
    for (double tau : cfg.maturities) {
        s.smiles.push_back(read_smiles_csv(cfg.output_dir / ("smiles_" + tau_tag(tau) + ".csv"), tau));
    }
    const PcaStage p = run_pca(s, cfg);
    write_pca_artifacts(p, cfg);
    for (const auto& m : p.models) {
        std::printf("%s: %zu rows, 3 PCs explain %.4f\n", maturity_label(m.tau).c_str(), m.rows, m.total_explained);
    }
}

void cmd_study(const RunConfig& cfg) {
    PcaStage p;
    std::vector<ComponentInfo> infos;
    for (double tau : cfg.maturities) {
        const std::string tag = tau_tag(tau);
        p.scores.push_back(read_scores_csv(cfg.output_dir / ("scores_" + tag + ".csv"), tau));
        auto comps = read_explained_csv(cfg.output_dir / ("explained_" + tag + ".csv"), tau);
        PcaModel m;
        m.tau = tau;
        m.loadings.resize(static_cast<Eigen::Index>(kBinCount), static_cast<Eigen::Index>(comps.size()));
        for (const auto& c : comps) {
            m.signs.push_back(c.sign);
            m.regions.push_back(c.region);
        }
        p.models.push_back(std::move(m));
    }
    const DayPartition part = read_partition_csv(cfg.output_dir / "days.csv");
    const TestReport r = run_tests(p, part, cfg);
    write_report_artifacts(r, cfg);
    print_report_summary(r);
}

void cmd_run_all(const RunConfig& cfg) {
    IngestedMarket m = ingest(cfg);
    const PipelineResult r = run_pipeline(m.underlying, chain_from_quotes(m.underlying, m.quotes), cfg);
    m.report.minutes_with_surfaces = r.surfaces.minutes_with_surfaces;
    write_text(cfg.output_dir / "ingest_report.json", m.report.to_json());
    write_artifacts(r, cfg);
    print_report_summary(r.report);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implied-volatility smile dynamics around intraday price jumps"};
    app.set_config("--config", "", "flat key=value file; command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    RunConfig& r = o.run;
    app.add_option("--underlying", r.underlying_csv, "underlying CSV (timestamp,price)");
    app.add_option("--options", r.options_dir, "directory of options CSVs");
    app.add_option("--out", r.output_dir, "output directory")->capture_default_str();
    app.add_option("--rate", r.rate, "risk-free rate, continuously compounded")->capture_default_str();
    app.add_option("--moneyness-lo", r.moneyness_lo)->capture_default_str();
    app.add_option("--moneyness-hi", r.moneyness_hi)->capture_default_str();
    app.add_option("--bin-width", r.bin_width)->capture_default_str();
    app.add_option("--maturities", o.maturities, "comma-separated maturities in years")->capture_default_str();
    app.add_option("--lambda", r.lambda, "thin-plate spline smoothing")->capture_default_str();
    app.add_option("--hull-margin", r.hull_margin)->capture_default_str();
    app.add_option("--sampling", r.jump_sampling, "jump-test sampling in minutes (5 or 15)")->capture_default_str();
    app.add_option("--alpha", r.alpha, "daily familywise jump-test level")->capture_default_str();
    app.add_option("--window-k", r.window_k, "bipower window (0: 270 at 5 min, 156 at 15 min)")->capture_default_str();
    app.add_option("--threshold", o.calibration, "simulated or gumbel")
        ->check(CLI::IsMember({"simulated", "gumbel"}))
        ->capture_default_str();
    app.add_option("--morning-first", o.morning_first)->capture_default_str();
    app.add_option("--morning-last", o.morning_last)->capture_default_str();
    app.add_option("--components", r.components)->capture_default_str();
    app.add_option("--deseasonalize", r.deseasonalize)->capture_default_str();
    app.add_option("--min-minutes", r.min_minutes, "first-hour scores needed per day")->capture_default_str();
    app.add_option("--trim-lo", r.trim_lo)->capture_default_str();
    app.add_option("--trim-hi", r.trim_hi)->capture_default_str();
    app.add_option("--level", r.level, "significance level of the summary grid")->capture_default_str();
    app.add_option("--pvalues", o.pvalues, "asymptotic, automatic or exact")
        ->check(CLI::IsMember({"asymptotic", "automatic", "exact"}))
        ->capture_default_str();
    app.add_option("--seed", o.market.seed, "seed for synth")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "write a synthetic market in the ingest schemas");
    MarketSpec& ms = o.market;
    synth->add_option("--days", ms.days)->capture_default_str();
    synth->add_option("--first-day", o.first_day, "first session, YYYY-MM-DD")->capture_default_str();
    synth->add_option("--vol", ms.annual_vol)->capture_default_str();
    synth->add_option("--spot", ms.spot0)->capture_default_str();
    synth->add_option("--jump-intensity", ms.jump_intensity, "Poisson jumps per day")->capture_default_str();
    synth->add_option("--jump-days", ms.forced_morning_jump_days, "days with one forced morning jump")
        ->capture_default_str();
    synth->add_option("--jump-free-days", ms.jump_free_days)->capture_default_str();
    synth->add_option("--jump-mean", ms.jump_mean)->capture_default_str();
    synth->add_option("--jump-sd", ms.jump_sd)->capture_default_str();
    synth->add_option("--delta-level", ms.delta_level, "per-minute level drift on jump mornings")
        ->capture_default_str();
    synth->add_option("--delta-var", ms.delta_var)->capture_default_str();
    synth->add_option("--half-spread", ms.half_spread)->capture_default_str();
    synth->add_option("--dir", o.synth_out, "output directory for the market")->capture_default_str();

    auto* ingest_cmd = app.add_subcommand("ingest", "validate input CSVs and write ingest_report.json");
    auto* detect = app.add_subcommand("detect-jumps", "jump scan and day partition from the underlying");
    auto* surfaces = app.add_subcommand("surfaces", "binned smiles per minute and maturity");
    auto* pca = app.add_subcommand("pca", "PCA / varimax and scores from smiles_<tau>.csv");
    auto* study = app.add_subcommand("study", "tests from scores_<tau>.csv, explained_<tau>.csv, days.csv");
    auto* run_all = app.add_subcommand("run-all", "every stage from the input CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        configure_workers();
        if (synth->parsed()) {
            o.market.first_day = parse_date(o.first_day);
            cmd_synth(o);
            return 0;
        }
        const RunConfig cfg = o.resolve();
        if (ingest_cmd->parsed()) cmd_ingest(cfg);
        if (detect->parsed()) cmd_detect(cfg);
        if (surfaces->parsed()) cmd_surfaces(cfg);
        if (pca->parsed()) cmd_pca(cfg);
        if (study->parsed()) cmd_study(cfg);
        if (run_all->parsed()) cmd_run_all(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
