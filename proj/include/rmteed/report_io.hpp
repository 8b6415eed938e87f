#pragma once

#include "rmteed/detect.hpp"
#include "rmteed/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace rmteed {

/// Library version baked in at build time.
const char* version();

/// Columns t, region, function, tau, eta, flag; eta is empty when undefined and flag is
/// "normal" or "anomalous". Numbers use the shortest round-trip representation.
std::string indicators_csv(const IndicatorSeries& series);
void write_indicators_csv(const IndicatorSeries& series, const std::filesystem::path& path);

/// Inverse of indicators_csv. Reference moments are not part of the CSV and come back empty.
IndicatorSeries parse_indicators_csv(const std::string& text);
IndicatorSeries read_indicators_csv(const std::filesystem::path& path);

nlohmann::json report_json(const EventReport& report, const IndicatorSeries& series);

/// Reads indicators.csv from a report directory and, when report.json is present, restores
/// window metadata and reference moments from it.
IndicatorSeries read_report_dir(const std::filesystem::path& dir);

/// {"tool", "version", "subcommand", "seed", "parameters"}; no timestamps, so identical runs
/// give identical files.
nlohmann::json run_record(const std::string& subcommand, std::uint64_t seed, const nlohmann::json& parameters);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// Spectrum as re,im CSV plus a sidecar JSON with Freedman-Diaconis histogram metadata of the
/// moduli (ring) or real parts (covariance).
void write_spectrum_dump(const SpectrumSet& s, const std::filesystem::path& csv_path);

}  // namespace rmteed
