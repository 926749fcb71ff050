#pragma once

#include <string>
#include <vector>

#include "twa/aging.hpp"
#include "twa/atpg.hpp"
#include "twa/faultsim.hpp"
#include "twa/logicsim.hpp"
#include "twa/stabsearch.hpp"
#include "twa/timing.hpp"

namespace twa {

std::string read_text_file(const std::string& path);                      // throws IoError
void write_text_file(const std::string& path, const std::string& text);   // throws IoError

DelayLibrary parse_delay_library(const std::string& json_text);
std::string serialize_delay_library(const DelayLibrary& lib);

struct StimulusFile {
  std::vector<InputVector> vectors;
  int repeat = 1;

  // Vectors repeated `repeat` times, width-checked. Throws WidthMismatch.
  std::vector<InputVector> expand(std::size_t expected_width) const;
};

StimulusFile parse_stimulus_file(const std::string& json_text);
std::string serialize_stimulus_file(const StimulusFile& s);

DutyProfile parse_duty_profile(const std::string& json_text);
std::string serialize_duty_profile(const DutyProfile& p);

AgingParams parse_aging_params(const std::string& json_text);
std::string serialize_aging_params(const AgingParams& p);

std::string serialize_activity_report(const ActivityReport& r);

// Timing report: arrival map, critical delay, enumerated paths.
std::string serialize_sta_report(const StaResult& sta, const std::vector<TimingPath>& paths);
std::string serialize_path(const TimingPath& p);
// Accepts a bare path object, a list, or a report with a "paths" array.
std::vector<TimingPath> parse_paths(const std::string& json_text);

AgedDelays parse_aged_delays(const std::string& json_text);
std::string serialize_aged_delays(const AgedDelays& d);

std::string serialize_patterns(const std::vector<TestPattern>& patterns, const CoverageReport& coverage);
std::vector<TestPattern> parse_patterns(const std::string& json_text);

std::string serialize_traces(const std::vector<StimulusTrace>& traces);
std::vector<StimulusTrace> parse_traces(const std::string& json_text);

std::string serialize_corruption_diff(const CorruptionDiff& d);

std::string serialize_stability_check(const StabilityCheck& c);

}  // namespace twa
