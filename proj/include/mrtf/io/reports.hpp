#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

#include "mrtf/core/matrix.hpp"
#include "mrtf/fed/engine.hpp"

namespace mrtf::io {

/// Shortest text that parses back to the same double.
std::string format_double(double value);

inline constexpr const char* kMetricsHeader = "# mrtf-metrics v1";

/// Version comment, column header, then one row per round. Wallclock is left out so
/// that replays compare byte for byte.
void write_metrics_csv(std::ostream& out, std::span<const fed::RoundMetrics> rounds);

/// Tab-separated dump of one round's teacher targets: round, sample, source, then C probabilities.
void write_targets_tsv(std::ostream& out, std::size_t round, std::string_view source, const Matrix& probs,
                       bool header);

}  // namespace mrtf::io
