#include "smilejump/csv_io.hpp"

#include "smilejump/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smilejump {

namespace {

constexpr std::size_t kMaxExamples = 100;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw SchemaError("empty file: " + path.string());
    return text;
}

// Calls fn(line_number, line) for every line after the header.
template <class Fn>
void for_each_row(const fs::path& path, std::string_view header, Fn&& fn) {
    const std::string text = read_file(path);
    std::size_t pos = 0, line_no = 0;
    bool seen_header = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!seen_header) {
            if (line != header) {
                throw SchemaError(path.string() + ": expected header '" + std::string(header) + "'");
            }
            seen_header = true;
            continue;
        }
        if (line.empty()) continue;
        fn(line_no, line);
    }
}

char right_code(OptionRight r) { return r == OptionRight::call ? 'C' : 'P'; }

int parse_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw SchemaError("bad integer '" + std::string(s) + "'");
    return v;
}

SmileRegion parse_region(std::string_view s) {
    if (s == "otm_put") return SmileRegion::otm_put;
    if (s == "otm_call") return SmileRegion::otm_call;
    if (s == "atm") return SmileRegion::atm;
    throw SchemaError("bad region '" + std::string(s) + "'");
}

DayGroup parse_group(std::string_view s) {
    if (s == "jump") return DayGroup::jump_morning;
    if (s == "nojump") return DayGroup::no_jump;
    if (s == "excluded") return DayGroup::excluded;
    throw SchemaError("bad day group '" + std::string(s) + "'");
}

} // namespace

std::size_t IngestReport::rejected_total() const {
    std::size_t n = 0;
    for (const auto& [reason, count] : rejected) n += count;
    return n;
}

void IngestReport::reject(const std::string& file, std::size_t line, const std::string& reason) {
    ++rejected[reason];
    if (examples.size() < kMaxExamples) examples.push_back({file, line, reason});
}

std::string IngestReport::to_json() const {
    nlohmann::ordered_json j;
    j["rows_read"] = rows_read;
    j["rows_accepted"] = rows_accepted;
    j["rows_rejected"] = rejected_total();
    j["rejected_by_reason"] = rejected;
    auto ex = nlohmann::ordered_json::array();
    for (const auto& r : examples) ex.push_back({{"file", r.file}, {"line", r.line}, {"reason", r.reason}});
    j["rejections"] = ex;
    j["underlying_rows"] = underlying_rows;
    j["underlying_filled"] = underlying_filled;
    j["days_covered"] = days_covered;
    j["minutes_with_surfaces"] = minutes_with_surfaces;
    return j.dump(2) + "\n";
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw SchemaError("bad number '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t c = line.find(',', pos);
        if (c == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, c - pos));
        pos = c + 1;
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("write failed: " + path.string());
}

void write_underlying_csv(const fs::path& path, const PriceSeries& series) {
    std::string text(kUnderlyingHeader);
    text += '\n';
    const auto ts = series.timestamps();
    const auto px = series.prices();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        text += format_timestamp(ts[i]);
        text += ',';
        text += format_double(px[i]);
        text += '\n';
    }
    write_text(path, text);
}

PriceSeries read_underlying_csv(const fs::path& path, IngestReport& report) {
    const std::string file = path.string();
    std::vector<std::pair<Timestamp, double>> rows;
    for_each_row(path, kUnderlyingHeader, [&](std::size_t line_no, std::string_view line) {
        ++report.rows_read;
        const auto f = split_csv(line);
        Timestamp ts;
        double price = 0.0;
        try {
            if (f.size() != 2) throw SchemaError("column count");
            ts = parse_timestamp(f[0]);
            price = parse_double(f[1]);
        } catch (const std::exception&) {
            report.reject(file, line_no, "schema");
            return;
        }
        if (!(price > 0.0) || !std::isfinite(price)) {
            report.reject(file, line_no, "bound violation");
            return;
        }
        if (!ts.in_session()) {
            report.reject(file, line_no, "outside session");
            return;
        }
        rows.emplace_back(ts, price);
        ++report.rows_accepted;
        ++report.underlying_rows;
    });
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    // Later duplicates of a timestamp are rejected; the first row wins.
    std::vector<std::pair<Timestamp, double>> unique;
    for (const auto& r : rows) {
        if (!unique.empty() && unique.back().first == r.first) {
            --report.rows_accepted;
            --report.underlying_rows;
            report.reject(file, 0, "duplicate timestamp");
            continue;
        }
        unique.push_back(r);
    }
    if (unique.empty()) throw InsufficientData(file + ": no usable underlying rows");

    std::vector<Timestamp> ts;
    std::vector<double> px;
    std::size_t i = 0;
    while (i < unique.size()) {
        const Date day = unique[i].first.day;
        std::size_t j = i;
        while (j < unique.size() && unique[j].first.day == day) ++j;
        double last = unique[i].second;
        std::size_t k = i;
        for (int idx = 0; idx < kMinutesPerDay; ++idx) {
            const Timestamp t = session_minute(day, idx);
            if (k < j && unique[k].first == t) {
                last = unique[k].second;
                ++k;
            } else {
                ++report.underlying_filled;
            }
            ts.push_back(t);
            px.push_back(last);
        }
        i = j;
    }
    PriceSeries series(std::move(ts), std::move(px));
    report.days_covered = series.day_count();
    return series;
}

std::string options_csv(std::span<const OptionQuote> quotes) {
    std::string text(kOptionsHeader);
    text += '\n';
    for (const auto& q : quotes) {
        text += format_timestamp(q.timestamp);
        text += ',';
        text += format_date(q.expiry);
        text += ',';
        text += format_double(q.strike);
        text += ',';
        text += right_code(q.right);
        text += ',';
        text += format_double(q.bid);
        text += ',';
        text += format_double(q.ask);
        text += ',';
        text += format_double(q.spot);
        text += '\n';
    }
    return text;
}

std::vector<OptionQuote> read_options_csv(const fs::path& path, double rate, IngestReport& report) {
    const std::string file = path.string();
    std::vector<OptionQuote> out;
    for_each_row(path, kOptionsHeader, [&](std::size_t line_no, std::string_view line) {
        ++report.rows_read;
        const auto f = split_csv(line);
        OptionQuote q;
        try {
            if (f.size() != 7) throw SchemaError("column count");
            q.timestamp = parse_timestamp(f[0]);
            q.expiry = parse_date(f[1]);
            q.strike = parse_double(f[2]);
            if (f[3] == "C") {
                q.right = OptionRight::call;
            } else if (f[3] == "P") {
                q.right = OptionRight::put;
            } else {
                throw SchemaError("right");
            }
            q.bid = parse_double(f[4]);
            q.ask = parse_double(f[5]);
            q.spot = parse_double(f[6]);
            if (!(q.strike > 0.0) || !(q.spot > 0.0) || !std::isfinite(q.strike) || !std::isfinite(q.spot) ||
                !std::isfinite(q.bid) || !std::isfinite(q.ask)) {
                throw SchemaError("non-positive strike or spot");
            }
        } catch (const std::exception&) {
            report.reject(file, line_no, "schema");
            return;
        }
        const char* reason = nullptr;
        const int days = calendar_days_between(q.timestamp.day, q.expiry);
        if (!q.timestamp.in_session()) {
            reason = "outside session";
        } else if (days <= 0) {
            reason = "expired";
        } else if (q.ask < q.bid) {
            reason = "crossed quote";
        } else if (!(q.bid > 0.0)) {
            reason = "zero bid";
        } else {
            const PriceBounds b = price_bounds(q.spot, q.strike, rate, days / 365.0, q.right);
            const double mid = q.mid();
            if (!(mid > b.lower && mid < b.upper)) reason = "bound violation";
        }
        if (reason) {
            report.reject(file, line_no, reason);
            return;
        }
        out.push_back(q);
        ++report.rows_accepted;
    });
    return out;
}

std::vector<OptionQuote> read_options_dir(const fs::path& dir, double rate, IngestReport& report) {
    if (!fs::is_directory(dir)) throw ConfigError("options directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    if (files.empty()) throw ConfigError("no options CSV files in " + dir.string());
    std::sort(files.begin(), files.end());
    std::vector<OptionQuote> all;
    for (const auto& f : files) {
        auto part = read_options_csv(f, rate, report);
        all.insert(all.end(), part.begin(), part.end());
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const OptionQuote& a, const OptionQuote& b) { return a.timestamp < b.timestamp; });
    return all;
}

std::string jumps_csv(const std::vector<JumpEvent>& events) {
    std::string text(kJumpsHeader);
    text += '\n';
    for (const auto& e : events) {
        text += format_timestamp(e.timestamp) + ',' + format_double(e.statistic) + ',' +
                format_double(e.beta_star) + ',' + format_double(e.log_return) + ',' +
                format_double(e.local_sigma) + '\n';
    }
    return text;
}

std::vector<JumpEvent> read_jumps_csv(const fs::path& path) {
    std::vector<JumpEvent> out;
    for_each_row(path, kJumpsHeader, [&](std::size_t line_no, std::string_view line) {
        const auto f = split_csv(line);
        if (f.size() != 5) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": column count");
        JumpEvent e;
        e.timestamp = parse_timestamp(f[0]);
        e.statistic = parse_double(f[1]);
        e.beta_star = parse_double(f[2]);
        e.log_return = parse_double(f[3]);
        e.local_sigma = parse_double(f[4]);
        e.direction = e.statistic > 0.0 ? 1 : e.statistic < 0.0 ? -1 : 0;
        e.zero_vol_anomaly = std::isinf(e.statistic);
        out.push_back(e);
    });
    return out;
}

std::string partition_csv(const DayPartition& p) {
    std::string text = "day,group,morning_events\n";
    for (std::size_t i = 0; i < p.days.size(); ++i) {
        text += format_date(p.days[i]) + ',' + to_string(p.groups[i]) + ',' + std::to_string(p.morning_events[i]) + '\n';
    }
    return text;
}

DayPartition read_partition_csv(const fs::path& path) {
    DayPartition p;
    for_each_row(path, "day,group,morning_events", [&](std::size_t line_no, std::string_view line) {
        const auto f = split_csv(line);
        if (f.size() != 3) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": column count");
        p.days.push_back(parse_date(f[0]));
        p.groups.push_back(parse_group(f[1]));
        p.morning_events.push_back(parse_int(f[2]));
    });
    return p;
}

namespace {

std::string smiles_header() {
    std::string h = "timestamp";
    for (std::size_t k = 1; k <= kBinCount; ++k) h += ",iv_" + std::to_string(k);
    return h;
}

std::string scores_header(Eigen::Index k) {
    std::string h = "timestamp";
    for (Eigen::Index j = 1; j <= k; ++j) h += ",pc" + std::to_string(j);
    return h;
}

constexpr std::string_view kExplainedHeader = "pc,eigenvalue,explained,cumulative,rotated_explained,sign,region";

} // namespace

std::string smiles_csv(std::span<const SmileSample> smiles) {
    std::string text = smiles_header() + '\n';
    for (const auto& s : smiles) {
        text += format_timestamp({s.day, s.minute});
        for (double v : s.iv_bins) text += ',' + format_double(v);
        text += '\n';
    }
    return text;
}

std::vector<SmileSample> read_smiles_csv(const fs::path& path, double tau) {
    std::vector<SmileSample> out;
    for_each_row(path, smiles_header(), [&](std::size_t line_no, std::string_view line) {
        const auto f = split_csv(line);
        if (f.size() != kBinCount + 1) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": column count");
        SmileSample s;
        const Timestamp ts = parse_timestamp(f[0]);
        s.day = ts.day;
        s.minute = ts.minute;
        s.tau = tau;
        for (std::size_t k = 0; k < kBinCount; ++k) s.iv_bins[k] = parse_double(f[k + 1]);
        out.push_back(s);
    });
    return out;
}

std::string scores_csv(const ScorePanel& scores) {
    std::string text = scores_header(scores.scores.cols()) + '\n';
    for (std::size_t r = 0; r < scores.rows.size(); ++r) {
        text += format_timestamp(scores.rows[r]);
        for (Eigen::Index c = 0; c < scores.scores.cols(); ++c) {
            text += ',' + format_double(scores.scores(static_cast<Eigen::Index>(r), c));
        }
        text += '\n';
    }
    return text;
}

ScorePanel read_scores_csv(const fs::path& path, double tau) {
    ScorePanel p;
    p.tau = tau;
    std::vector<double> flat;
    for_each_row(path, scores_header(3), [&](std::size_t line_no, std::string_view line) {
        const auto f = split_csv(line);
        if (f.size() != 4) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": column count");
        p.rows.push_back(parse_timestamp(f[0]));
        for (std::size_t c = 1; c < 4; ++c) flat.push_back(parse_double(f[c]));
    });
    const auto n = static_cast<Eigen::Index>(p.rows.size());
    p.scores = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), n, 3);
    p.deseasonalized = true;
    return p;
}

std::string loadings_csv(const PcaModel& model, const MoneynessGrid& grid) {
    std::string text = "moneyness";
    for (Eigen::Index j = 1; j <= model.loadings.cols(); ++j) text += ",pc" + std::to_string(j);
    text += '\n';
    for (Eigen::Index r = 0; r < model.loadings.rows(); ++r) {
        text += format_double(grid.center(static_cast<std::size_t>(r)));
        for (Eigen::Index c = 0; c < model.loadings.cols(); ++c) text += ',' + format_double(model.loadings(r, c));
        text += '\n';
    }
    return text;
}

std::string explained_csv(const PcaModel& model) {
    std::string text(kExplainedHeader);
    text += '\n';
    double cumulative = 0.0;
    for (Eigen::Index j = 0; j < model.loadings.cols(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        cumulative += model.explained(j);
        text += std::to_string(j + 1) + ',' + format_double(model.eigenvalues(j)) + ',' +
                format_double(model.explained(j)) + ',' + format_double(cumulative) + ',' +
                format_double(model.rotated_explained(j)) + ',' + (model.signs[u] >= 0 ? "pos" : "neg") + ',' +
                to_string(model.regions[u]) + '\n';
    }
    return text;
}

std::vector<ComponentInfo> read_explained_csv(const fs::path& path, double tau) {
    std::vector<ComponentInfo> out;
    for_each_row(path, kExplainedHeader, [&](std::size_t line_no, std::string_view line) {
        const auto f = split_csv(line);
        if (f.size() != 7) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": column count");
        ComponentInfo c;
        c.tau = tau;
        c.pc = parse_int(f[0]);
        if (f[5] != "pos" && f[5] != "neg") throw SchemaError(path.string() + ": bad sign");
        c.sign = f[5] == "pos" ? 1 : -1;
        c.region = parse_region(f[6]);
        out.push_back(c);
    });
    return out;
}

std::string tau_tag(double tau) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", tau);
    return buf;
}

} // namespace smilejump
