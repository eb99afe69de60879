#pragma once

#include <string>
#include <vector>

#include "dsiscan/types.hpp"

namespace dsiscan {

// CSV inputs: UTF-8, comma-delimited, '.' decimal separator, header row with
// exact column names. All loaders validate invariants and abort with a
// diagnostic naming the offending row.

SizeSample load_sizes(const std::string& path);
HoldingsTable load_holdings(const std::string& path);
ReturnsTable load_returns(const std::string& path);

void save_sizes(const SizeSample& sample, const std::string& path);

// Two-column CSV series, full double precision.
void write_series_csv(const std::string& path, const std::string& col_a,
                      const std::string& col_b,
                      const std::vector<std::pair<double, double>>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dsiscan
