#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsiscan {

// Thrown for malformed or invalid user input (maps to CLI exit code 2).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SizeEntry {
  std::string entity_id;
  double size_usd = 0.0;  // strictly positive, linear USD
};

// Universe of positive sizes under analysis.
struct SizeSample {
  std::vector<SizeEntry> entries;
  std::string currency_label = "USD";

  std::size_t size() const { return entries.size(); }
  std::vector<double> log_sizes() const;
};

struct Position {
  std::string entity_id;
  std::string asset_id;
  double weight = 0.0;  // nonnegative fraction, not renormalized
  std::optional<double> market_cap_usd;
};

// fund -> (asset, weight, market cap) records.
struct HoldingsTable {
  std::vector<Position> positions;

  // entity -> (asset -> weight), aggregation used by the portfolio module.
  std::map<std::string, std::map<std::string, double>> by_entity() const;
};

struct ReturnObs {
  std::string date;  // ISO-8601 calendar day
  double value = 0.0;
};

struct ReturnsTable {
  std::map<std::string, std::vector<ReturnObs>> series;
};

}  // namespace dsiscan
