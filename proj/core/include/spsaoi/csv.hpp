#ifndef SPSAOI_CSV_HPP
#define SPSAOI_CSV_HPP

#include <iosfwd>
#include <string>

#include "spsaoi/pmf.hpp"

namespace spsaoi {

/// Real formatted with 17 significant digits (round-trippable doubles).
std::string format_real(double x);

/// Rows "value,probability" with a header, LF line endings.
void write_pmf_csv(std::ostream& out, const Pmf& pmf,
                   const std::string& value_header = "value",
                   const std::string& prob_header = "probability");

/// Rows "delta,pmf,cdf" over the pmf support.
void write_pmf_cdf_csv(std::ostream& out, const Pmf& pmf,
                       const std::string& value_header = "delta");

}  // namespace spsaoi

#endif  // SPSAOI_CSV_HPP
