#include "mrtf/io/reports.hpp"

#include <array>
#include <charconv>
#include <ostream>

namespace mrtf::io {

std::string format_double(double value) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_metrics_csv(std::ostream& out, std::span<const fed::RoundMetrics> rounds) {
  out << kMetricsHeader << '\n';
  out << "round,acc_aggregated,acc_refined,acc_ensemble,mean_local_loss,u_t,gradient_variance\n";
  for (const auto& m : rounds) {
    out << m.round << ',' << format_double(m.acc_aggregated) << ',' << format_double(m.acc_refined) << ','
        << format_double(m.acc_ensemble) << ',' << format_double(m.mean_local_loss) << ',' << format_double(m.u_t)
        << ',' << format_double(m.gradient_variance) << '\n';
  }
}

void write_targets_tsv(std::ostream& out, std::size_t round, std::string_view source, const Matrix& probs,
                       bool header) {
  if (header) {
    out << "round\tsample\tsource";
    for (std::size_t c = 0; c < probs.cols(); ++c) out << "\tp" << c;
    out << '\n';
  }
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    out << round << '\t' << i << '\t' << source;
    for (double p : probs.row(i)) out << '\t' << format_double(p);
    out << '\n';
  }
}

}  // namespace mrtf::io
