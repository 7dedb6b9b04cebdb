#include "smilejump/study.hpp"

#include "smilejump/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace smilejump {

SummaryResult day_summaries(const ScorePanel& scores, const DayPartition& partition,
                            const SummaryOptions& opts) {
    std::map<Date, std::vector<Eigen::Index>> morning_rows;
    for (std::size_t r = 0; r < scores.rows.size(); ++r) {
        const auto& ts = scores.rows[r];
        if (ts.minute >= opts.window.first_minute && ts.minute <= opts.window.last_minute) {
            morning_rows[ts.day].push_back(static_cast<Eigen::Index>(r));
        }
    }

    SummaryResult out;
    const Eigen::Index k = scores.scores.cols();
    for (std::size_t d = 0; d < partition.days.size(); ++d) {
        const DayGroup group = partition.groups[d];
        if (group == DayGroup::excluded) continue;
        const auto it = morning_rows.find(partition.days[d]);
        const std::size_t count = it == morning_rows.end() ? 0 : it->second.size();
        if (count < static_cast<std::size_t>(std::max(opts.min_minutes, 2))) {
            out.insufficient_days.push_back(partition.days[d]);
            continue;
        }
        const auto& rows = it->second;
        for (Eigen::Index pc = 0; pc < k; ++pc) {
            double sum = 0.0;
            for (const auto r : rows) sum += scores.scores(r, pc);
            const double mu = sum / static_cast<double>(count);
            double ss = 0.0;
            for (const auto r : rows) {
                const double dev = scores.scores(r, pc) - mu;
                ss += dev * dev;
            }
            DayScoreSummary s;
            s.day = partition.days[d];
            s.group = group;
            s.pc = static_cast<int>(pc) + 1;
            s.tau = scores.tau;
            s.mu = mu;
            s.nu = ss / static_cast<double>(count - 1);
            s.minutes = static_cast<int>(count);
            out.summaries.push_back(s);
        }
    }
    return out;
}

double empirical_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("empirical_quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical_quantile: p outside [0,1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TrimmedSample trim(std::span<const double> values, double lo, double hi, std::size_t min_count) {
    TrimmedSample t;
    t.before = values.size();
    if (values.size() < min_count || values.empty()) {
        t.values.assign(values.begin(), values.end());
        t.after = t.values.size();
        t.skipped = true;
        if (!values.empty()) {
            const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
            t.lo_bound = *mn;
            t.hi_bound = *mx;
        }
        return t;
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    t.lo_bound = empirical_quantile(sorted, lo);
    t.hi_bound = empirical_quantile(sorted, hi);
    for (double v : values) {
        if (v >= t.lo_bound && v <= t.hi_bound) t.values.push_back(v);
    }
    t.after = t.values.size();
    return t;
}

Effect ks_effect(const HypothesisTriple& p, double level) {
    if (!(p.h0 < level)) return Effect::none;
    const bool smaller_cdf = p.h0s < level; // F_jump < F_nojump: jump values larger
    const bool greater_cdf = p.h0g < level;
    if (smaller_cdf && (!greater_cdf || p.h0s < p.h0g)) return Effect::higher;
    if (greater_cdf && (!smaller_cdf || p.h0g < p.h0s)) return Effect::lower;
    return Effect::none;
}

Effect welch_effect(const HypothesisTriple& p, double level) {
    if (!(p.h0 < level)) return Effect::none;
    if (p.h0g < level && p.h0g <= p.h0s) return Effect::higher;
    if (p.h0s < level && p.h0s < p.h0g) return Effect::lower;
    return Effect::none;
}

char effect_symbol(Effect effect, int sign) {
    switch (effect) {
    case Effect::higher: return sign >= 0 ? '+' : '-';
    case Effect::lower: return sign >= 0 ? '-' : '+';
    case Effect::none: return '=';
    case Effect::insufficient: return '?';
    }
    return '?';
}

namespace {

SampleCell compare(std::vector<double> jump, std::vector<double> nojump, int sign, const StudyConfig& cfg) {
    SampleCell cell;
    cell.n_jump_raw = jump.size();
    cell.n_nojump_raw = nojump.size();
    const TrimmedSample tj = trim(jump, cfg.trim_lo, cfg.trim_hi, cfg.min_trim_count);
    const TrimmedSample tn = trim(nojump, cfg.trim_lo, cfg.trim_hi, cfg.min_trim_count);
    cell.n_jump = tj.after;
    cell.n_nojump = tn.after;
    if (tj.after < 2 || tn.after < 2) {
        cell.sufficient = false;
        cell.ks_symbol = cell.welch_symbol = '?';
        return cell;
    }
    cell.sufficient = true;
    cell.ks = ks_two_sample(tj.values, tn.values, cfg.mode);
    cell.welch = welch_u(tj.values, tn.values, cfg.mode);
    cell.ks_p = {cell.ks.p_two_sided, cell.ks.p_less, cell.ks.p_greater};
    cell.welch_p = {cell.welch.p_two_sided, cell.welch.p_less, cell.welch.p_greater};
    cell.ks_symbol = effect_symbol(ks_effect(cell.ks_p, cfg.level), sign);
    cell.welch_symbol = effect_symbol(welch_effect(cell.welch_p, cfg.level), sign);
    return cell;
}

} // namespace

TestReport run_study(std::span<const DayScoreSummary> summaries_in,
                     std::span<const ComponentInfo> components, const StudyConfig& cfg) {
    std::vector<DayScoreSummary> summaries(summaries_in.begin(), summaries_in.end());
    std::sort(summaries.begin(), summaries.end(), [](const auto& a, const auto& b) {
        return std::tie(a.tau, a.pc, a.day) < std::tie(b.tau, b.pc, b.day);
    });

    TestReport report;
    report.level = cfg.level;
    std::vector<ComponentInfo> infos(components.begin(), components.end());
    std::sort(infos.begin(), infos.end(),
              [](const auto& a, const auto& b) { return std::tie(a.tau, a.pc) < std::tie(b.tau, b.pc); });
    for (const auto& info : infos) {
        if (report.taus.empty() || report.taus.back() != info.tau) report.taus.push_back(info.tau);
        std::vector<double> m1, m0, s1, s0;
        for (const auto& s : summaries) {
            if (std::abs(s.tau - info.tau) > 1e-12 || s.pc != info.pc) continue;
            if (s.group == DayGroup::jump_morning) {
                m1.push_back(s.mu);
                s1.push_back(s.nu);
            } else if (s.group == DayGroup::no_jump) {
                m0.push_back(s.mu);
                s0.push_back(s.nu);
            }
        }
        ComponentReport cr;
        cr.info = info;
        cr.mean = compare(std::move(m1), std::move(m0), info.sign, cfg);
        cr.var = compare(std::move(s1), std::move(s0), info.sign, cfg);
        report.components.push_back(std::move(cr));
    }
    return report;
}

const ComponentReport* TestReport::find(double tau, int pc) const {
    for (const auto& c : components) {
        if (std::abs(c.info.tau - tau) <= 1e-12 && c.info.pc == pc) return &c;
    }
    return nullptr;
}

bool TestReport::all_neutral() const {
    for (const auto& c : components) {
        for (const SampleCell* cell : {&c.mean, &c.var}) {
            if (!cell->sufficient || cell->ks_symbol != '=' || cell->welch_symbol != '=') return false;
        }
    }
    return !components.empty();
}

std::string maturity_label(double tau) {
    return std::to_string(static_cast<int>(std::lround(tau * 12.0))) + "M";
}

namespace {

std::string fmt_p(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

nlohmann::ordered_json triple_json(const HypothesisTriple& p) {
    return {{"H0", p.h0}, {"H0s", p.h0s}, {"H0g", p.h0g}};
}

nlohmann::ordered_json cell_json(const SampleCell& c) {
    nlohmann::ordered_json j;
    j["sufficient"] = c.sufficient;
    j["n_jump_raw"] = c.n_jump_raw;
    j["n_nojump_raw"] = c.n_nojump_raw;
    j["n_jump"] = c.n_jump;
    j["n_nojump"] = c.n_nojump;
    if (c.sufficient) {
        j["ks"] = triple_json(c.ks_p);
        j["ks"]["D"] = c.ks.d;
        j["ks"]["D_plus"] = c.ks.d_plus;
        j["ks"]["D_minus"] = c.ks.d_minus;
        j["welch_u"] = triple_json(c.welch_p);
        j["welch_u"]["t"] = c.welch.t_statistic;
        j["welch_u"]["df"] = c.welch.df;
        j["welch_u"]["rank_mean_jump"] = c.welch.rank_mean_x;
        j["welch_u"]["rank_mean_nojump"] = c.welch.rank_mean_y;
    }
    j["ks_symbol"] = std::string(1, c.ks_symbol);
    j["welch_u_symbol"] = std::string(1, c.welch_symbol);
    return j;
}

} // namespace

std::string report_csv(const TestReport& report) {
    std::ostringstream out;
    out << "test,sample,maturity";
    for (int pc = 1; pc <= 3; ++pc) {
        out << ",pc" << pc << "_sign,pc" << pc << "_H0,pc" << pc << "_H0s,pc" << pc << "_H0g";
    }
    out << '\n';
    for (const char* test : {"KS", "WelchU"}) {
        const bool ks = std::string(test) == "KS";
        for (const char* sample : {"M", "Sigma"}) {
            const bool mean = std::string(sample) == "M";
            for (double tau : report.taus) {
                out << test << ',' << sample << ',' << maturity_label(tau);
                for (int pc = 1; pc <= 3; ++pc) {
                    const ComponentReport* c = report.find(tau, pc);
                    if (!c) {
                        out << ",NA,NA,NA,NA";
                        continue;
                    }
                    out << ',' << (c->info.sign >= 0 ? "pos" : "neg");
                    const SampleCell& cell = mean ? c->mean : c->var;
                    if (!cell.sufficient) {
                        out << ",NA,NA,NA";
                        continue;
                    }
                    const HypothesisTriple& p = ks ? cell.ks_p : cell.welch_p;
                    out << ',' << fmt_p(p.h0) << ',' << fmt_p(p.h0s) << ',' << fmt_p(p.h0g);
                }
                out << '\n';
            }
        }
    }
    return out.str();
}

std::string report_json(const TestReport& report) {
    nlohmann::ordered_json j;
    j["level"] = report.level;
    j["groups"] = {{"jump", report.jump_days},
                   {"nojump", report.nojump_days},
                   {"excluded", report.excluded_days}};
    j["insufficient_days"] = report.insufficient_days;
    auto comps = nlohmann::ordered_json::array();
    auto grid = nlohmann::ordered_json::array();
    for (const auto& c : report.components) {
        nlohmann::ordered_json cj;
        cj["maturity"] = maturity_label(c.info.tau);
        cj["tau"] = c.info.tau;
        cj["pc"] = c.info.pc;
        cj["sign"] = c.info.sign >= 0 ? "pos" : "neg";
        cj["region"] = to_string(c.info.region);
        cj["M"] = cell_json(c.mean);
        cj["Sigma"] = cell_json(c.var);
        comps.push_back(cj);
        grid.push_back({{"maturity", maturity_label(c.info.tau)},
                        {"pc", c.info.pc},
                        {"region", to_string(c.info.region)},
                        {"mean_ks", std::string(1, c.mean.ks_symbol)},
                        {"mean_welch_u", std::string(1, c.mean.welch_symbol)},
                        {"var_ks", std::string(1, c.var.ks_symbol)},
                        {"var_welch_u", std::string(1, c.var.welch_symbol)}});
    }
    j["components"] = comps;
    j["summary_grid"] = grid;
    return j.dump(2) + "\n";
}

} // namespace smilejump
