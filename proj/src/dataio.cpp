#include "dsiscan/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace dsiscan {

std::vector<double> SizeSample::log_sizes() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(std::log(e.size_usd));
  return out;
}

std::map<std::string, std::map<std::string, double>> HoldingsTable::by_entity()
    const {
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& p : positions) out[p.entity_id][p.asset_id] = p.weight;
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& s, const std::string& path,
                    std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InputError("dataio: " + path + ": malformed " + col + " at row " +
                     std::to_string(row) + " ('" + s + "')");
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("dataio: cannot open file: " + path);
  return in;
}

void expect_header(const std::string& got, const std::string& want,
                   const std::string& path) {
  std::string cleaned = got;
  cleaned.erase(std::remove(cleaned.begin(), cleaned.end(), '\r'),
                cleaned.end());
  if (cleaned != want) {
    throw InputError("dataio: " + path + ": expected header '" + want +
                     "', got '" + cleaned + "'");
  }
}

bool valid_iso_date(const std::string& d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
  }
  const int month = std::stoi(d.substr(5, 2));
  const int day = std::stoi(d.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SizeSample load_sizes(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataio: empty file: " + path);
  expect_header(line, "entity_id,size_usd", path);

  SizeSample sample;
  std::set<std::string> seen;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw InputError("dataio: " + path + ": malformed row " +
                       std::to_string(row) + " (expected 2 fields)");
    }
    SizeEntry e;
    e.entity_id = fields[0];
    e.size_usd = parse_number(fields[1], path, row, "size_usd");
    if (!(e.size_usd > 0.0)) {
      throw InputError("dataio: " + path + ": nonpositive size at row " +
                       std::to_string(row));
    }
    if (!seen.insert(e.entity_id).second) {
      throw InputError("dataio: " + path + ": duplicate entity_id '" +
                       e.entity_id + "' at row " + std::to_string(row));
    }
    sample.entries.push_back(std::move(e));
  }
  return sample;
}

HoldingsTable load_holdings(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataio: empty file: " + path);
  expect_header(line, "entity_id,asset_id,weight,market_cap_usd", path);

  HoldingsTable table;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw InputError("dataio: " + path + ": malformed row " +
                       std::to_string(row) + " (expected 4 fields)");
    }
    Position p;
    p.entity_id = fields[0];
    p.asset_id = fields[1];
    p.weight = parse_number(fields[2], path, row, "weight");
    if (p.weight < 0.0) {
      throw InputError("dataio: " + path + ": negative weight at row " +
                       std::to_string(row));
    }
    if (!fields[3].empty()) {
      const double cap = parse_number(fields[3], path, row, "market_cap_usd");
      if (!(cap > 0.0)) {
        throw InputError("dataio: " + path +
                         ": nonpositive market_cap_usd at row " +
                         std::to_string(row));
      }
      p.market_cap_usd = cap;
    }
    if (!seen.insert({p.entity_id, p.asset_id}).second) {
      throw InputError("dataio: " + path + ": duplicate (entity, asset) pair (" +
                       p.entity_id + ", " + p.asset_id + ") at row " +
                       std::to_string(row));
    }
    table.positions.push_back(std::move(p));
  }
  return table;
}

ReturnsTable load_returns(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataio: empty file: " + path);
  expect_header(line, "entity_id,date,return", path);

  ReturnsTable table;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw InputError("dataio: " + path + ": malformed row " +
                       std::to_string(row) + " (expected 3 fields)");
    }
    if (!valid_iso_date(fields[1])) {
      throw InputError("dataio: " + path + ": invalid ISO-8601 date at row " +
                       std::to_string(row) + " ('" + fields[1] + "')");
    }
    const double r = parse_number(fields[2], path, row, "return");
    if (r <= -1.0) {
      throw InputError("dataio: " + path + ": return <= -1 at row " +
                       std::to_string(row));
    }
    table.series[fields[0]].push_back({fields[1], r});
  }
  // ISO dates sort lexicographically, so string comparison orders days.
  for (auto& [entity, series] : table.series) {
    std::stable_sort(series.begin(), series.end(),
                     [](const ReturnObs& a, const ReturnObs& b) {
                       return a.date < b.date;
                     });
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].date == series[i - 1].date) {
        throw InputError("dataio: " + path + ": duplicate date " +
                         series[i].date + " for entity '" + entity + "'");
      }
    }
  }
  return table;
}

void save_sizes(const SizeSample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("dataio: cannot write file: " + path);
  out << "entity_id,size_usd\n";
  for (const auto& e : sample.entries) {
    out << e.entity_id << ',' << format_full(e.size_usd) << '\n';
  }
}

void write_series_csv(const std::string& path, const std::string& col_a,
                      const std::string& col_b,
                      const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("dataio: cannot write file: " + path);
  out << col_a << ',' << col_b << '\n';
  for (const auto& [a, b] : rows) {
    out << format_full(a) << ',' << format_full(b) << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw InputError("dataio: cannot write file: " + path);
  out << content;
}

}  // namespace dsiscan
