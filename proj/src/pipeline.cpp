#include "smilejump/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace smilejump {

void RunConfig::validate() const {
    grid().validate();
    if (maturities.empty()) throw ConfigError("maturities: at least one required");
    for (double t : maturities) {
        if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("maturities must be positive");
    }
    if (!std::is_sorted(maturities.begin(), maturities.end()) ||
        std::adjacent_find(maturities.begin(), maturities.end()) != maturities.end()) {
        throw ConfigError("maturities must be strictly increasing");
    }
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(hull_margin >= 0.0)) throw ConfigError("hull_margin must be >= 0");
    if (jump_sampling != 5 && jump_sampling != 15) throw ConfigError("jump_sampling must be 5 or 15");
    primary_test().validate();
    if (morning_first < kSessionOpen || morning_last > kSessionClose || morning_first > morning_last) {
        throw ConfigError("morning window must lie inside the session");
    }
    if (components < 1 || components > static_cast<int>(kBinCount)) throw ConfigError("components out of range");
    if (min_minutes < 2) throw ConfigError("min_minutes must be >= 2");
    if (!(trim_lo >= 0.0 && trim_lo < trim_hi && trim_hi <= 1.0)) throw ConfigError("trim quantiles out of order");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0,1)");
}

void RunConfig::validate_paths() const {
    if (underlying_csv.empty() || !fs::is_regular_file(underlying_csv)) {
        throw ConfigError("underlying CSV not found: " + underlying_csv.string());
    }
    if (options_dir.empty() || !fs::is_directory(options_dir)) {
        throw ConfigError("options directory not found: " + options_dir.string());
    }
}

SurfaceConfig RunConfig::surface() const {
    SurfaceConfig s;
    s.rate = rate;
    s.lambda = lambda;
    s.hull_margin = hull_margin;
    s.grid = grid();
    s.taus = maturities;
    return s;
}

JumpTest RunConfig::primary_test() const {
    JumpTest t = JumpTest::for_sampling(jump_sampling, alpha);
    if (window_k > 0) t.window_k = window_k;
    t.calibration = calibration;
    return t;
}

JumpTest RunConfig::secondary_test() const {
    JumpTest t = JumpTest::for_sampling(jump_sampling == 5 ? 15 : 5, alpha);
    t.calibration = calibration;
    return t;
}

StudyConfig RunConfig::study() const {
    StudyConfig s;
    s.trim_lo = trim_lo;
    s.trim_hi = trim_hi;
    s.level = level;
    s.mode = pvalues;
    return s;
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

} // namespace

SurfaceStage run_surfaces(const PriceSeries& underlying, const ChainSource& chain, const RunConfig& cfg) {
    const SurfaceConfig scfg = cfg.surface();
    SurfaceStage out;
    out.smiles.resize(scfg.taus.size());
    for (std::size_t d = 0; d < underlying.day_count(); ++d) {
        const std::vector<OptionQuote> quotes = chain(d);
        std::vector<MinuteQuotes> minutes;
        std::size_t i = 0;
        while (i < quotes.size()) {
            std::size_t j = i;
            while (j < quotes.size() && quotes[j].timestamp == quotes[i].timestamp) ++j;
            minutes.push_back({quotes[i].timestamp, std::span<const OptionQuote>(quotes).subspan(i, j - i)});
            i = j;
        }
        const auto smiles = extract_minute_smiles(minutes, scfg);
        for (const auto& ms : smiles) {
            ++out.minutes;
            out.rejected_solver += ms.stats.rejected_solver;
            out.rejected_arbitrage += ms.stats.rejected_arbitrage;
            bool all = true;
            for (std::size_t t = 0; t < scfg.taus.size(); ++t) {
                if (!ms.by_tau[t]) {
                    all = false;
                    continue;
                }
                out.smiles[t].push_back({ms.ts.day, ms.ts.minute, scfg.taus[t], *ms.by_tau[t]});
            }
            if (all) ++out.minutes_with_surfaces;
        }
    }
    return out;
}

JumpStage run_jumps(const PriceSeries& underlying, const RunConfig& cfg) {
    JumpStage out;
    out.primary = scan_jumps(underlying, cfg.primary_test());
    out.secondary = scan_jumps(underlying, cfg.secondary_test());
    const JumpScan scans[] = {out.primary, out.secondary};
    out.partition = classify_mornings(scans, cfg.window());
    return out;
}

PcaStage run_pca(const SurfaceStage& surfaces, const RunConfig& cfg) {
    PcaStage out;
    for (std::size_t t = 0; t < cfg.maturities.size(); ++t) {
        const DeltaIvPanel panel = build_panel(surfaces.smiles[t], cfg.maturities[t]);
        PcaModel model = fit_pca(panel, cfg.components);
        ScorePanel scores = compute_scores(panel, model);
        if (cfg.deseasonalize) scores = deseasonalize(scores);
        out.models.push_back(std::move(model));
        out.scores.push_back(std::move(scores));
    }
    return out;
}

TestReport run_tests(const PcaStage& pca, const DayPartition& partition, const RunConfig& cfg,
                     std::vector<DayScoreSummary>* summaries_out) {
    std::vector<DayScoreSummary> summaries;
    std::vector<ComponentInfo> components;
    std::vector<std::size_t> insufficient;
    SummaryOptions opts;
    opts.min_minutes = cfg.min_minutes;
    opts.window = cfg.window();
    for (std::size_t t = 0; t < pca.scores.size(); ++t) {
        const auto res = day_summaries(pca.scores[t], partition, opts);
        summaries.insert(summaries.end(), res.summaries.begin(), res.summaries.end());
        insufficient.push_back(res.insufficient_days.size());
        const PcaModel& m = pca.models[t];
        for (Eigen::Index j = 0; j < m.loadings.cols(); ++j) {
            const auto u = static_cast<std::size_t>(j);
            components.push_back({m.tau, static_cast<int>(j) + 1, m.signs[u], m.regions[u]});
        }
    }
    TestReport report = run_study(summaries, components, cfg.study());
    report.jump_days = partition.count(DayGroup::jump_morning);
    report.nojump_days = partition.count(DayGroup::no_jump);
    report.excluded_days = partition.count(DayGroup::excluded);
    report.insufficient_days = std::move(insufficient);
    if (summaries_out) *summaries_out = std::move(summaries);
    return report;
}

PipelineResult run_pipeline(const PriceSeries& underlying, const ChainSource& chain, const RunConfig& cfg) {
    stage("config", [&] { cfg.validate(); return 0; });
    PipelineResult r;
    r.jumps = stage("detect-jumps", [&] { return run_jumps(underlying, cfg); });
    r.surfaces = stage("surfaces", [&] { return run_surfaces(underlying, chain, cfg); });
    r.pca = stage("pca", [&] { return run_pca(r.surfaces, cfg); });
    r.report = stage("study", [&] { return run_tests(r.pca, r.jumps.partition, cfg, &r.summaries); });
    return r;
}

ChainSource chain_from_quotes(const PriceSeries& underlying, std::span<const OptionQuote> quotes) {
    std::vector<Date> days(underlying.days().begin(), underlying.days().end());
    return [days = std::move(days), quotes](std::size_t d) {
        const Date day = days.at(d);
        const auto lo = std::lower_bound(quotes.begin(), quotes.end(), day,
                                         [](const OptionQuote& q, Date x) { return q.timestamp.day < x; });
        const auto hi = std::upper_bound(lo, quotes.end(), day,
                                         [](Date x, const OptionQuote& q) { return x < q.timestamp.day; });
        return std::vector<OptionQuote>(lo, hi);
    };
}

IngestedMarket ingest(const RunConfig& cfg) {
    return stage("ingest", [&] {
        cfg.validate_paths();
        IngestedMarket m;
        m.underlying = read_underlying_csv(cfg.underlying_csv, m.report);
        m.quotes = read_options_dir(cfg.options_dir, cfg.rate, m.report);
        return m;
    });
}

void write_jump_artifacts(const JumpStage& jumps, const RunConfig& cfg) {
    write_text(cfg.output_dir / "jumps.csv", jumps_csv(jumps.primary.events));
    write_text(cfg.output_dir / ("jumps_" + std::to_string(jumps.secondary.test.sampling_minutes) + "min.csv"),
               jumps_csv(jumps.secondary.events));
    write_text(cfg.output_dir / "days.csv", partition_csv(jumps.partition));
}

void write_surface_artifacts(const SurfaceStage& surfaces, const RunConfig& cfg) {
    for (std::size_t t = 0; t < cfg.maturities.size(); ++t) {
        write_text(cfg.output_dir / ("smiles_" + tau_tag(cfg.maturities[t]) + ".csv"), smiles_csv(surfaces.smiles[t]));
    }
}

void write_pca_artifacts(const PcaStage& pca, const RunConfig& cfg) {
    for (std::size_t t = 0; t < pca.models.size(); ++t) {
        const std::string tag = tau_tag(pca.models[t].tau);
        write_text(cfg.output_dir / ("loadings_" + tag + ".csv"), loadings_csv(pca.models[t], cfg.grid()));
        write_text(cfg.output_dir / ("explained_" + tag + ".csv"), explained_csv(pca.models[t]));
        write_text(cfg.output_dir / ("scores_" + tag + ".csv"), scores_csv(pca.scores[t]));
    }
}

void write_report_artifacts(const TestReport& report, const RunConfig& cfg) {
    write_text(cfg.output_dir / "report.json", report_json(report));
    write_text(cfg.output_dir / "report.csv", report_csv(report));
}

void write_artifacts(const PipelineResult& result, const RunConfig& cfg) {
    write_jump_artifacts(result.jumps, cfg);
    write_surface_artifacts(result.surfaces, cfg);
    write_pca_artifacts(result.pca, cfg);
    write_report_artifacts(result.report, cfg);
}

} // namespace smilejump
