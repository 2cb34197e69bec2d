#include "spsaoi/csv.hpp"

#include <cstdio>
#include <ostream>

namespace spsaoi {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_pmf_csv(std::ostream& out, const Pmf& pmf,
                   const std::string& value_header,
                   const std::string& prob_header) {
  out << value_header << ',' << prob_header << '\n';
  for (std::int64_t x = pmf.min_value(); x <= pmf.max_value(); ++x) {
    out << x << ',' << format_real(pmf.at(x)) << '\n';
  }
}

void write_pmf_cdf_csv(std::ostream& out, const Pmf& pmf,
                       const std::string& value_header) {
  out << value_header << ",pmf,cdf\n";
  double run = 0.0;
  for (std::int64_t x = pmf.min_value(); x <= pmf.max_value(); ++x) {
    const double p = pmf.at(x);
    run += p;
    out << x << ',' << format_real(p) << ',' << format_real(run) << '\n';
  }
}

}  // namespace spsaoi
