#pragma once

#include "smilejump/csv_io.hpp"
#include "smilejump/errors.hpp"
#include "smilejump/kernels.hpp"
#include "smilejump/study.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace smilejump {

struct RunConfig {
    fs::path underlying_csv;
    fs::path options_dir;
    fs::path output_dir = "out";

    double rate = 0.0;
    double moneyness_lo = 0.8;
    double moneyness_hi = 1.3;
    double bin_width = 0.05;
    std::vector<double> maturities{0.25, 0.5, 0.75};
    double lambda = 1e-6;
    double hull_margin = 0.0;

    int jump_sampling = 5;
    double alpha = 0.01;
    int window_k = 0; // 0: default for the sampling interval
    ThresholdCalibration calibration = ThresholdCalibration::simulated;
    int morning_first = kMorningFirst;
    int morning_last = kMorningLast;

    int components = 3;
    bool deseasonalize = true;
    int min_minutes = 45;
    double trim_lo = 0.02;
    double trim_hi = 0.98;
    double level = 0.05;
    PValueMode pvalues = PValueMode::automatic;

    std::uint64_t seed = 1;

    /// Parameter invariants; throws ConfigError.
    void validate() const;
    /// Input paths must exist; throws ConfigError.
    void validate_paths() const;

    MoneynessGrid grid() const { return {moneyness_lo, moneyness_hi, bin_width}; }
    SurfaceConfig surface() const;
    JumpTest primary_test() const;
    /// The other of the 5 / 15 minute samplings, with its default window.
    JumpTest secondary_test() const;
    MorningWindow window() const { return {morning_first, morning_last}; }
    StudyConfig study() const;
};

/// A fatal error tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Quotes of session `day` (index into the underlying's days), any order
/// within a minute, minutes ascending.
using ChainSource = std::function<std::vector<OptionQuote>(std::size_t day)>;

struct SurfaceStage {
    std::vector<std::vector<SmileSample>> smiles; // per maturity
    std::size_t minutes = 0;
    std::size_t minutes_with_surfaces = 0; // every maturity extracted
    std::size_t rejected_solver = 0;
    std::size_t rejected_arbitrage = 0;
};

struct JumpStage {
    JumpScan primary;
    JumpScan secondary;
    DayPartition partition;
};

struct PcaStage {
    std::vector<PcaModel> models;
    std::vector<ScorePanel> scores; // deseasonalized when configured
};

struct PipelineResult {
    SurfaceStage surfaces;
    JumpStage jumps;
    PcaStage pca;
    std::vector<DayScoreSummary> summaries;
    TestReport report;
};

SurfaceStage run_surfaces(const PriceSeries& underlying, const ChainSource& chain, const RunConfig& cfg);
JumpStage run_jumps(const PriceSeries& underlying, const RunConfig& cfg);
PcaStage run_pca(const SurfaceStage& surfaces, const RunConfig& cfg);
TestReport run_tests(const PcaStage& pca, const DayPartition& partition, const RunConfig& cfg,
                     std::vector<DayScoreSummary>* summaries = nullptr);

/// All stages in order; errors are rethrown as StageError.
PipelineResult run_pipeline(const PriceSeries& underlying, const ChainSource& chain, const RunConfig& cfg);

/// Chain source over an in-memory, timestamp-sorted quote set.
ChainSource chain_from_quotes(const PriceSeries& underlying, std::span<const OptionQuote> quotes);

struct IngestedMarket {
    PriceSeries underlying;
    std::vector<OptionQuote> quotes;
    IngestReport report;
};

IngestedMarket ingest(const RunConfig& cfg);

void write_jump_artifacts(const JumpStage& jumps, const RunConfig& cfg);
void write_surface_artifacts(const SurfaceStage& surfaces, const RunConfig& cfg);
void write_pca_artifacts(const PcaStage& pca, const RunConfig& cfg);
void write_report_artifacts(const TestReport& report, const RunConfig& cfg);
/// Every artifact of a full run into cfg.output_dir.
void write_artifacts(const PipelineResult& result, const RunConfig& cfg);

} // namespace smilejump
