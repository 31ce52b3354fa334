#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveysynth/analysis.hpp"
#include "surveysynth/datagen.hpp"
#include "surveysynth/model.hpp"
#include "surveysynth/simstudy.hpp"

namespace surveysynth {

/// Unreadable or unwritable file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents; the message carries the line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double.
std::string format_double(double x);
double parse_double(const std::string& text);
Count parse_count(const std::string& text);

std::string format_date(std::chrono::sys_days d);
/// YYYY-MM-DD; throws ParseError on anything else or an invalid day.
std::chrono::sys_days parse_date(const std::string& text);

// Panel CSV:
//   # meta N <population>
//   # meta T <time-points>
//   # meta survey <k> <label>      (one per survey, k = 0..K-1)
//   survey,t,y,n                   (one row per observed cell)
void write_panel_csv(std::ostream& os, const SurveyPanel& panel);
SurveyPanel read_panel_csv(std::istream& is);

// Truth sidecar: theta[0..T], sigma_sq, pi_sq (or null), gamma, positives, phi.
struct TruthRecord {
    LatentState state;
    std::vector<Count> positives;
    std::vector<std::vector<double>> phi;
    bool operator==(const TruthRecord&) const = default;
};
void write_truth_json(std::ostream& os, const TruthRecord& truth);
TruthRecord read_truth_json(std::istream& is);

// survey,date,y,n
void write_records_csv(std::ostream& os, const std::vector<DatedRecord>& records);
std::vector<DatedRecord> read_records_csv(std::istream& is);

// t,rate,margin
void write_benchmark_csv(std::ostream& os, const BenchmarkSeries& bench);
BenchmarkSeries read_benchmark_csv(std::istream& is);

// # meta alpha <alpha>
// # meta converged <0|1>
// parameter,survey,t,median,lower,upper,r_hat,ess
void write_summary_csv(std::ostream& os, const SummaryTable& table);
SummaryTable read_summary_csv(std::istream& is);

// truth_kind,fit_kind,T,n_reps,n_used,mse,mcse,ci_lo,ci_hi,failures (mcse empty when undefined)
void write_sim_results_csv(std::ostream& os, const std::vector<CellResult>& cells);
std::vector<CellResult> read_sim_results_csv(std::istream& is);

// truth_kind,fit_kind,T,rep,panel_hash,truth_rate,estimate,sq_error,r_hat,failed,note
void write_replications_csv(std::ostream& os, const std::vector<ReplicationRecord>& records);
std::vector<ReplicationRecord> read_replications_csv(std::istream& is);

// t,median,lower,upper,r_hat,ess,converged,error (rate columns empty for failed t*)
void write_nowcast_csv(std::ostream& os, const std::vector<NowcastPoint>& points);

// t,ratio,flagged
void write_ratio_csv(std::ostream& os, const RatioReport& report);

// t,p_hat_baseline,p_hat_method,moe_baseline,moe_method,ratio,n_iid_baseline,n_iid_method,gain,literal_unsquared
void write_niid_csv(std::ostream& os, const NiidReport& report);

// t,date
void write_dates_csv(std::ostream& os, const std::vector<std::chrono::sys_days>& dates);

/// Whole-file helpers; throw IoError when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

} // namespace surveysynth
