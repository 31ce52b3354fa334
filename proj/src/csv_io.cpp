#include "surveysynth/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace surveysynth {

namespace {

using json = nlohmann::json;

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

/// Line reader that tracks line numbers and strips CR.
class Lines {
public:
    explicit Lines(std::istream& is) : is_(is) {}

    bool next(std::string& line) {
        while (std::getline(is_, line)) {
            ++number_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(number_) + ": " + what);
    }
    std::vector<std::string> fields(const std::string& line, std::size_t expected) const {
        auto f = split(line);
        if (f.size() != expected)
            fail("expected " + std::to_string(expected) + " fields, got " + std::to_string(f.size()));
        return f;
    }
    void header(const std::string& expected) {
        std::string line;
        while (next(line)) {
            if (line.rfind('#', 0) == 0) continue;
            if (line != expected) fail("expected header '" + expected + "'");
            return;
        }
        fail("missing header '" + expected + "'");
    }

private:
    std::istream& is_;
    int number_ = 0;
};

void check_label(const std::string& label) {
    if (label.empty() || label.find_first_of(",\n\r") != std::string::npos)
        throw std::invalid_argument("survey label '" + label + "' cannot be written to CSV");
}

template <class F>
auto guarded(const Lines& lines, F&& f) {
    try {
        return f();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        lines.fail(e.what());
    }
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

} // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ParseError("not a number: '" + text + "'");
    return v;
}

Count parse_count(const std::string& text) {
    Count v = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ParseError("not an integer: '" + text + "'");
    return v;
}

std::string format_date(std::chrono::sys_days d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::chrono::sys_days parse_date(const std::string& text) {
    using namespace std::chrono;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw ParseError("not an ISO date: '" + text + "'");
    try {
        const auto y = static_cast<int>(parse_count(text.substr(0, 4)));
        const auto m = static_cast<unsigned>(parse_count(text.substr(5, 2)));
        const auto d = static_cast<unsigned>(parse_count(text.substr(8, 2)));
        const year_month_day ymd{year{y}, month{m}, day{d}};
        if (!ymd.ok()) throw ParseError("");
        return sys_days{ymd};
    } catch (const ParseError&) {
        throw ParseError("not an ISO date: '" + text + "'");
    }
}

void write_panel_csv(std::ostream& os, const SurveyPanel& panel) {
    os << "# meta N " << panel.population() << "\n";
    os << "# meta T " << panel.time_points() << "\n";
    for (int k = 0; k < panel.surveys(); ++k) {
        check_label(panel.label(k));
        os << "# meta survey " << k << " " << panel.label(k) << "\n";
    }
    os << "survey,t,y,n\n";
    for (int k = 0; k < panel.surveys(); ++k)
        for (int t = 1; t <= panel.time_points(); ++t) {
            const Cell& c = panel.cell(k, t);
            if (c.y || c.n) {
                os << panel.label(k) << "," << t << ",";
                if (c.y) os << *c.y;
                os << ",";
                if (c.n) os << *c.n;
                os << "\n";
            }
        }
}

SurveyPanel read_panel_csv(std::istream& is) {
    Lines lines(is);
    std::string line;
    std::optional<Count> N;
    std::optional<int> T;
    std::map<int, std::string> labels;
    bool header = false;
    while (!header && lines.next(line)) {
        if (line == "survey,t,y,n") {
            header = true;
            break;
        }
        std::istringstream ss(line);
        std::string hash, meta, key;
        ss >> hash >> meta >> key;
        if (hash != "#") lines.fail("expected meta line or header");
        if (meta != "meta") continue;
        if (key == "N") {
            std::string v;
            ss >> v;
            N = guarded(lines, [&] { return parse_count(v); });
        } else if (key == "T") {
            std::string v;
            ss >> v;
            T = static_cast<int>(guarded(lines, [&] { return parse_count(v); }));
        } else if (key == "survey") {
            std::string idx, label;
            ss >> idx;
            std::getline(ss >> std::ws, label);
            const int k = static_cast<int>(guarded(lines, [&] { return parse_count(idx); }));
            if (!labels.emplace(k, label).second) lines.fail("survey index " + idx + " repeated");
        } else {
            lines.fail("unknown meta key '" + key + "'");
        }
    }
    if (!header) lines.fail("missing header 'survey,t,y,n'");
    if (!N || !T) lines.fail("meta lines for N and T are required");
    if (*T < 1) lines.fail("T must be at least 1");
    std::vector<std::string> ordered;
    for (const auto& [k, label] : labels) {
        if (k != static_cast<int>(ordered.size())) lines.fail("survey indices must be 0..K-1");
        ordered.push_back(label);
    }
    SurveyPanel panel(*N, ordered, *T);
    std::vector<bool> seen(ordered.size() * *T, false);
    while (lines.next(line)) {
        const auto f = lines.fields(line, 4);
        const int k = panel.survey_index(f[0]);
        if (k < 0) lines.fail("unknown survey '" + f[0] + "'");
        const int t = static_cast<int>(guarded(lines, [&] { return parse_count(f[1]); }));
        if (t < 1 || t > *T) lines.fail("time index out of range");
        const std::size_t slot = static_cast<std::size_t>(k) * *T + (t - 1);
        if (seen[slot]) lines.fail("duplicate cell for " + f[0] + " at t=" + f[1]);
        seen[slot] = true;
        Cell& c = panel.cell(k, t);
        if (!f[2].empty()) c.y = guarded(lines, [&] { return parse_count(f[2]); });
        if (!f[3].empty()) c.n = guarded(lines, [&] { return parse_count(f[3]); });
    }
    return panel;
}

void write_truth_json(std::ostream& os, const TruthRecord& truth) {
    json j;
    j["theta"] = truth.state.theta;
    j["sigma_sq"] = truth.state.sigma_sq;
    j["pi_sq"] = truth.state.pi_sq ? json(*truth.state.pi_sq) : json(nullptr);
    j["gamma"] = truth.state.gamma;
    j["positives"] = truth.positives;
    j["phi"] = truth.phi;
    os << j.dump(2) << "\n";
}

TruthRecord read_truth_json(std::istream& is) {
    try {
        const json j = json::parse(is);
        TruthRecord t;
        t.state.theta = j.at("theta").get<std::vector<double>>();
        t.state.sigma_sq = j.at("sigma_sq").get<double>();
        if (!j.at("pi_sq").is_null()) t.state.pi_sq = j.at("pi_sq").get<double>();
        t.state.gamma = j.at("gamma").get<std::vector<std::vector<double>>>();
        t.positives = j.at("positives").get<std::vector<Count>>();
        t.phi = j.at("phi").get<std::vector<std::vector<double>>>();
        return t;
    } catch (const json::exception& e) {
        throw ParseError(std::string("truth file: ") + e.what());
    }
}

void write_records_csv(std::ostream& os, const std::vector<DatedRecord>& records) {
    os << "survey,date,y,n\n";
    for (const auto& r : records) {
        check_label(r.survey);
        os << r.survey << "," << format_date(r.date) << "," << r.y << "," << r.n << "\n";
    }
}

std::vector<DatedRecord> read_records_csv(std::istream& is) {
    Lines lines(is);
    lines.header("survey,date,y,n");
    std::vector<DatedRecord> out;
    std::string line;
    while (lines.next(line)) {
        const auto f = lines.fields(line, 4);
        if (f[0].empty()) lines.fail("empty survey label");
        DatedRecord r;
        r.survey = f[0];
        r.date = guarded(lines, [&] { return parse_date(f[1]); });
        r.y = guarded(lines, [&] { return parse_count(f[2]); });
        r.n = guarded(lines, [&] { return parse_count(f[3]); });
        if (r.y < 0 || r.n <= 0 || r.y > r.n) lines.fail("need 0 <= y <= n and n > 0");
        out.push_back(r);
    }
    return out;
}

void write_benchmark_csv(std::ostream& os, const BenchmarkSeries& bench) {
    os << "t,rate,margin\n";
    for (const auto& p : bench.points) os << p.t << "," << format_double(p.rate) << "," << format_double(p.margin) << "\n";
}

BenchmarkSeries read_benchmark_csv(std::istream& is) {
    Lines lines(is);
    lines.header("t,rate,margin");
    BenchmarkSeries out;
    std::string line;
    while (lines.next(line)) {
        const auto f = lines.fields(line, 3);
        BenchmarkPoint p;
        p.t = static_cast<int>(guarded(lines, [&] { return parse_count(f[0]); }));
        p.rate = guarded(lines, [&] { return parse_double(f[1]); });
        p.margin = guarded(lines, [&] { return parse_double(f[2]); });
        if (p.t < 1) lines.fail("time index must be positive");
        if (!(p.rate > 0.0 && p.rate < 1.0)) lines.fail("benchmark rate outside (0,1)");
        if (!(p.margin >= 0.0)) lines.fail("negative margin");
        if (out.at(p.t)) lines.fail("duplicate benchmark time index");
        out.points.push_back(p);
    }
    return out;
}

void write_summary_csv(std::ostream& os, const SummaryTable& table) {
    os << "# meta alpha " << format_double(table.alpha) << "\n";
    os << "# meta converged " << (table.converged ? 1 : 0) << "\n";
    os << "parameter,survey,t,median,lower,upper,r_hat,ess\n";
    auto row = [&](const SummaryRow& r) {
        os << r.parameter << "," << r.survey << "," << r.t << "," << format_double(r.median) << ","
           << format_double(r.lower) << "," << format_double(r.upper) << "," << format_double(r.r_hat) << ","
           << format_double(r.ess) << "\n";
    };
    for (const auto& r : table.rates) row(r);
    for (const auto& r : table.parameters) row(r);
}

SummaryTable read_summary_csv(std::istream& is) {
    Lines lines(is);
    SummaryTable table;
    std::string line;
    bool header = false;
    while (lines.next(line)) {
        if (line == "parameter,survey,t,median,lower,upper,r_hat,ess") {
            header = true;
            break;
        }
        std::istringstream ss(line);
        std::string hash, meta, key, value;
        ss >> hash >> meta >> key >> value;
        if (hash != "#") lines.fail("expected meta line or header");
        if (key == "alpha") table.alpha = guarded(lines, [&] { return parse_double(value); });
        if (key == "converged") table.converged = value == "1";
    }
    if (!header) lines.fail("missing summary header");
    while (lines.next(line)) {
        const auto f = lines.fields(line, 8);
        SummaryRow r;
        r.parameter = f[0];
        r.survey = f[1];
        guarded(lines, [&] {
            r.t = static_cast<int>(parse_count(f[2]));
            r.median = parse_double(f[3]);
            r.lower = parse_double(f[4]);
            r.upper = parse_double(f[5]);
            r.r_hat = parse_double(f[6]);
            r.ess = parse_double(f[7]);
            return 0;
        });
        (r.parameter == "rate" || r.parameter == "theta" ? table.rates : table.parameters).push_back(r);
    }
    return table;
}

void write_sim_results_csv(std::ostream& os, const std::vector<CellResult>& cells) {
    os << "truth_kind,fit_kind,T,n_reps,n_used,mse,mcse,ci_lo,ci_hi,failures\n";
    for (const auto& c : cells)
        os << to_string(c.truth) << "," << to_string(c.fit) << "," << c.T << "," << c.n_reps << "," << c.n_used << ","
           << format_double(c.mse) << "," << opt(c.mcse) << "," << format_double(c.ci_lo) << ","
           << format_double(c.ci_hi) << "," << c.failures << "\n";
}

std::vector<CellResult> read_sim_results_csv(std::istream& is) {
    Lines lines(is);
    lines.header("truth_kind,fit_kind,T,n_reps,n_used,mse,mcse,ci_lo,ci_hi,failures");
    std::vector<CellResult> out;
    std::string line;
    while (lines.next(line)) {
        const auto f = lines.fields(line, 10);
        out.push_back(guarded(lines, [&] {
            CellResult c;
            c.truth = parse_bias_kind(f[0]);
            c.fit = parse_fit_kind(f[1]);
            c.T = static_cast<int>(parse_count(f[2]));
            c.n_reps = static_cast<int>(parse_count(f[3]));
            c.n_used = static_cast<int>(parse_count(f[4]));
            c.mse = parse_double(f[5]);
            if (!f[6].empty()) c.mcse = parse_double(f[6]);
            c.ci_lo = parse_double(f[7]);
            c.ci_hi = parse_double(f[8]);
            c.failures = static_cast<int>(parse_count(f[9]));
            return c;
        }));
    }
    return out;
}

void write_replications_csv(std::ostream& os, const std::vector<ReplicationRecord>& records) {
    os << "truth_kind,fit_kind,T,rep,panel_hash,truth_rate,estimate,sq_error,r_hat,failed,note\n";
    for (const auto& r : records) {
        std::string note = r.note;
        for (char& c : note)
            if (c == ',' || c == '\n' || c == '\r') c = ';';
        os << to_string(r.truth) << "," << to_string(r.fit) << "," << r.T << "," << r.rep << "," << r.panel_hash << ","
           << format_double(r.truth_rate) << "," << format_double(r.estimate) << "," << format_double(r.sq_error)
           << "," << format_double(r.r_hat) << "," << (r.failed ? 1 : 0) << "," << note << "\n";
    }
}

std::vector<ReplicationRecord> read_replications_csv(std::istream& is) {
    Lines lines(is);
    lines.header("truth_kind,fit_kind,T,rep,panel_hash,truth_rate,estimate,sq_error,r_hat,failed,note");
    std::vector<ReplicationRecord> out;
    std::string line;
    while (lines.next(line)) {
        const auto f = lines.fields(line, 11);
        out.push_back(guarded(lines, [&] {
            ReplicationRecord r;
            r.truth = parse_bias_kind(f[0]);
            r.fit = parse_fit_kind(f[1]);
            r.T = static_cast<int>(parse_count(f[2]));
            r.rep = static_cast<int>(parse_count(f[3]));
            std::uint64_t h = 0;
            const auto res = std::from_chars(f[4].data(), f[4].data() + f[4].size(), h);
            if (res.ec != std::errc() || res.ptr != f[4].data() + f[4].size()) throw ParseError("bad panel hash");
            r.panel_hash = h;
            r.truth_rate = parse_double(f[5]);
            r.estimate = parse_double(f[6]);
            r.sq_error = parse_double(f[7]);
            r.r_hat = parse_double(f[8]);
            r.failed = f[9] == "1";
            r.note = f[10];
            return r;
        }));
    }
    return out;
}

void write_nowcast_csv(std::ostream& os, const std::vector<NowcastPoint>& points) {
    os << "t,median,lower,upper,r_hat,ess,converged,error\n";
    for (const auto& p : points) {
        std::string err = p.error;
        for (char& c : err)
            if (c == ',' || c == '\n' || c == '\r') c = ';';
        os << p.t << ",";
        if (p.rate)
            os << format_double(p.rate->median) << "," << format_double(p.rate->lower) << ","
               << format_double(p.rate->upper) << "," << format_double(p.rate->r_hat) << ","
               << format_double(p.rate->ess);
        else
            os << ",,,,";
        os << "," << (p.converged ? 1 : 0) << "," << err << "\n";
    }
}

void write_ratio_csv(std::ostream& os, const RatioReport& report) {
    os << "t,ratio,flagged\n";
    for (std::size_t i = 0; i < report.ratio.size(); ++i) {
        const int t = static_cast<int>(i) + 1;
        const bool flagged = std::find(report.flagged.begin(), report.flagged.end(), t) != report.flagged.end();
        if (!report.ratio[i] && !flagged) continue;
        os << t << "," << opt(report.ratio[i]) << "," << (flagged ? 1 : 0) << "\n";
    }
}

void write_niid_csv(std::ostream& os, const NiidReport& report) {
    os << "t,p_hat_baseline,p_hat_method,moe_baseline,moe_method,ratio,n_iid_baseline,n_iid_method,gain,"
          "literal_unsquared\n";
    for (const auto& r : report.rows)
        os << r.t << "," << format_double(r.p_hat_baseline) << "," << format_double(r.p_hat_method) << ","
           << format_double(r.moe_baseline) << "," << format_double(r.moe_method) << "," << format_double(r.ratio)
           << "," << opt(r.n_iid_baseline) << "," << opt(r.n_iid_method) << "," << opt(r.gain) << ","
           << opt(r.literal) << "\n";
}

void write_dates_csv(std::ostream& os, const std::vector<std::chrono::sys_days>& dates) {
    os << "t,date\n";
    for (std::size_t i = 0; i < dates.size(); ++i) os << i + 1 << "," << format_date(dates[i]) << "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

} // namespace surveysynth
