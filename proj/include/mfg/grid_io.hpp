#pragma once

#include <string>

#include "mfg/grid.hpp"

namespace mfg {

/// CSV with header `i,j,value`, one row per node in lexicographic order, values in %.17g.
void write_field_csv(const std::string& path, const GridField& f);

/// Reads a CSV written by write_field_csv (any row order). The grid side is inferred from
/// the row count; throws UsageError if it differs from `expected_n_side` (when > 0).
GridField read_field_csv(const std::string& path, int expected_n_side = 0);

/// printf("%.17g"), the exact round-trip form used by every artifact.
std::string format_exact(double v);

}  // namespace mfg
