#pragma once

// Flat CSV formats for inputs and intermediates. Doubles are written with 17
// significant digits so every file reloads bit-exactly.

#include "smilejump/jumps.hpp"
#include "smilejump/pricing.hpp"
#include "smilejump/smilepca.hpp"
#include "smilejump/study.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace smilejump {

namespace fs = std::filesystem;

inline constexpr std::string_view kUnderlyingHeader = "timestamp,price";
inline constexpr std::string_view kOptionsHeader = "timestamp,expiry,strike,right,bid,ask,underlying_price";
inline constexpr std::string_view kJumpsHeader = "timestamp,L,beta_star,return,local_sigma";

struct Rejection {
    std::string file;
    std::size_t line = 0;
    std::string reason;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::map<std::string, std::size_t> rejected; // by reason
    std::vector<Rejection> examples;             // first rejections, with line numbers
    std::size_t underlying_rows = 0;
    std::size_t underlying_filled = 0; // session minutes forward-filled
    std::size_t days_covered = 0;
    std::size_t minutes_with_surfaces = 0; // filled in by the pipeline

    std::size_t rejected_total() const;
    void reject(const std::string& file, std::size_t line, const std::string& reason);
    std::string to_json() const;
};

std::string format_double(double v);
double parse_double(std::string_view text);
std::vector<std::string_view> split_csv(std::string_view line);

/// Writes `text` to `path`, creating parent directories.
void write_text(const fs::path& path, const std::string& text);

void write_underlying_csv(const fs::path& path, const PriceSeries& series);
/// Drops off-session rows and forward-fills missing session minutes between
/// a day's first and last observation (leading minutes take the first price).
PriceSeries read_underlying_csv(const fs::path& path, IngestReport& report);

std::string options_csv(std::span<const OptionQuote> quotes);
/// Per-row screening: schema, outside session, expired, crossed quote, zero
/// bid, and mids outside the no-arbitrage bounds at `rate`.
std::vector<OptionQuote> read_options_csv(const fs::path& path, double rate, IngestReport& report);

/// Every *.csv in `dir`, in file-name order; quotes end up sorted by timestamp.
std::vector<OptionQuote> read_options_dir(const fs::path& dir, double rate, IngestReport& report);

std::string jumps_csv(const std::vector<JumpEvent>& events);
std::vector<JumpEvent> read_jumps_csv(const fs::path& path);

std::string partition_csv(const DayPartition& partition);
DayPartition read_partition_csv(const fs::path& path);

std::string smiles_csv(std::span<const SmileSample> smiles);
std::vector<SmileSample> read_smiles_csv(const fs::path& path, double tau);

std::string scores_csv(const ScorePanel& scores);
ScorePanel read_scores_csv(const fs::path& path, double tau);

std::string loadings_csv(const PcaModel& model, const MoneynessGrid& grid);
std::string explained_csv(const PcaModel& model);
std::vector<ComponentInfo> read_explained_csv(const fs::path& path, double tau);

/// File-name tag of a maturity, e.g. "0.25".
std::string tau_tag(double tau);

} // namespace smilejump
