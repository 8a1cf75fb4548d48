#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ofbm/bound.hpp"
#include "ofbm/experiment.hpp"

namespace ofbm {

/// `dir/name.csv` -> `dir/name.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Columns t,y1,y2; the sidecar holds n, seed and the generating theta.
void write_path_csv(const Path& path, const std::filesystem::path& csv);
/// Accepts `t,y1,y2` or `y1,y2` rows, with or without a header line. The
/// sidecar is read when present. Throws std::runtime_error on malformed input.
Path read_path_csv(const std::filesystem::path& csv);

/// Columns j,count,s11,s12,s22; the sidecar holds n, n_psi, the increment
/// variances, sigma_max and the excluded octaves.
void write_spectrum_csv(const SampleSpectrum& spectrum, const std::filesystem::path& csv);
SampleSpectrum read_spectrum_csv(const std::filesystem::path& csv);

/// `config` is embedded verbatim under "config" when not empty.
std::string estimation_json(const EstimationResult& result, const std::string& config = {});
std::string bound_terms_json(const ParamBox& box, const BoundResult& bound, const std::vector<BoundTerm>& terms);

/// One row per (run, method) with every coordinate and the cost fields.
void write_runs_csv(const std::vector<RunRecord>& runs, std::ostream& out);
/// Per (theta, n, method, coordinate) quartiles, mean, sd, bias and KL.
void write_summary_csv(const McSummary& summary, std::ostream& out);
/// Per (theta, n, method) iterations, wall time and iteration percentage.
void write_timing_csv(const McSummary& summary, std::ostream& out);
std::string summary_json(const McSummary& summary, const std::string& config);

/// Values of one named column of a CSV with a header line; empty cells skipped.
std::vector<double> read_csv_column(const std::filesystem::path& csv, const std::string& column);

/// Writes `text` to `file`, creating parent directories.
void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace ofbm
