#ifndef SEARCHLAB_REPORT_H
#define SEARCHLAB_REPORT_H

#include <filesystem>
#include <string>
#include <vector>

#include "searchlab/stats.h"

namespace searchlab {

// Stamped into every emitted file as leading comment lines.
struct Provenance {
  std::string config_hash;
  std::string tool_version;
};

// Human-facing variable names for regression output.
std::string display_name(const std::string& column);

// One observation per line, snake_case header, '#' provenance comments first.
void write_rows_csv(const std::filesystem::path& file, const std::vector<ObservationRow>& rows,
                    const Provenance& p);

// Columns metric,group,trial,value,sd; a gap point leaves value (and sd)
// empty. Only series matching `metric` are written.
void write_series_csv(const std::filesystem::path& file, const std::vector<Series>& series,
                      const std::string& metric, const Provenance& p);

// Reads a series CSV back, tolerating any metric mix in one file.
std::vector<Series> read_series_csv(const std::filesystem::path& file);

void write_overall_csv(const std::filesystem::path& file, const std::vector<OverallStat>& stats,
                       const Provenance& p);

// Fixed-width two-column regression table plus fit statistics and notes.
std::string heckman_table_text(const HeckmanResult& r, const Provenance& p);

// The same content as structured JSON for machine consumption.
std::string heckman_json_text(const HeckmanResult& r, const Provenance& p);

// Converts an external human-subject CSV (subject_id,k,trial,config_bits,
// payoff; trial 0 optionally discloses the start) into overlay series named
// "human/k=N" carrying active_fraction and distance_mean. Throws FormatError
// naming the offending row and column.
std::vector<Series> human_baseline_series(const std::filesystem::path& csv_file);

}  // namespace searchlab

#endif  // SEARCHLAB_REPORT_H
