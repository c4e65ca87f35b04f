#pragma once

#include <iosfwd>
#include <string>

#include "mvtest/sample.hpp"

namespace mvtest {

// Numeric CSV, one observation per row. A single leading header line is
// tolerated and skipped. Ragged rows, non-numeric fields, NaN/Inf and
// fewer than two data rows are rejected with the offending line number.
ContinuousSample load_continuous_csv(const std::string& path);
ContinuousSample read_continuous_csv(std::istream& in, const std::string& origin);

// Grid CSV with mandatory header "x,y,counts", one cell per row, covering
// the full cartesian grid of the x/y values exactly once (any row order).
DiscreteGridSample load_discrete_csv(const std::string& path);
DiscreteGridSample read_discrete_csv(std::istream& in, const std::string& origin);

void write_continuous_csv(const std::string& path, const ContinuousSample& s);
void write_discrete_csv(const std::string& path, const DiscreteGridSample& s);

}  // namespace mvtest
