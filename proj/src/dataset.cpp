#include "bcart/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bcart/rng.hpp"

namespace bcart {

int VariableSpec::level_index(const std::string& label) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == label) return static_cast<int>(i);
  return -1;
}

int CovariateSchema::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return static_cast<int>(i);
  return -1;
}

void CovariateSchema::validate() const {
  std::set<std::string> seen;
  for (const auto& v : variables) {
    if (!seen.insert(v.name).second) throw Error("schema: duplicate variable name '" + v.name + "'");
    if (v.kind == VariableKind::kCategorical && v.levels.size() > 64)
      throw Error("schema: categorical variable '" + v.name + "' has more than 64 levels");
  }
  if (response_column.empty()) throw Error("schema: response column not set");
  if (exposure_column.empty()) throw Error("schema: exposure column not set");
}

Dataset Dataset::subset(const std::vector<std::int32_t>& rows) const {
  Dataset out;
  out.schema = schema;
  out.columns.resize(columns.size());
  for (std::size_t v = 0; v < columns.size(); ++v) {
    if (schema.variables[v].kind == VariableKind::kNumeric) {
      out.columns[v].numeric.reserve(rows.size());
      for (auto r : rows) out.columns[v].numeric.push_back(columns[v].numeric[r]);
    } else {
      out.columns[v].categorical.reserve(rows.size());
      for (auto r : rows) out.columns[v].categorical.push_back(columns[v].categorical[r]);
    }
  }
  out.claims.reserve(rows.size());
  out.exposure.reserve(rows.size());
  for (auto r : rows) {
    out.claims.push_back(claims[r]);
    out.exposure.push_back(exposure[r]);
  }
  return out;
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < n_rows(); ++i) {
    if (claims[i] < 0) throw Error("dataset: negative claim count at row " + std::to_string(i + 1));
    if (!(exposure[i] > 0.0) || exposure[i] > 1.0)
      throw Error("dataset: exposure outside (0,1] at row " + std::to_string(i + 1));
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim whitespace and a trailing CR.
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t'))
      cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && (cell[b] == ' ' || cell[b] == '\t')) ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const char* what, std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(std::string("csv: bad ") + what + " '" + s + "' at row " + std::to_string(row) +
                " column '" + col + "'");
  }
}

}  // namespace

Dataset load_csv(const std::string& path, const CovariateSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw Error("csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error("csv: empty file '" + path + "'");
  const auto header = split_line(line);

  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw Error("csv: missing column '" + name + "' in '" + path + "'");
  };

  std::vector<int> var_col(schema.variables.size());
  for (std::size_t v = 0; v < schema.variables.size(); ++v)
    var_col[v] = find_col(schema.variables[v].name);
  const int claims_col = find_col(schema.response_column);
  const int exposure_col = find_col(schema.exposure_column);

  Dataset data;
  data.schema = schema;
  data.columns.resize(schema.variables.size());
  std::vector<bool> collect_levels(schema.variables.size(), false);
  for (std::size_t v = 0; v < schema.variables.size(); ++v)
    collect_levels[v] = schema.variables[v].kind == VariableKind::kCategorical &&
                        data.schema.variables[v].levels.empty();

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() < header.size())
      throw Error("csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                  " cells, expected " + std::to_string(header.size()));

    for (std::size_t v = 0; v < schema.variables.size(); ++v) {
      const auto& cell = cells[var_col[v]];
      auto& spec = data.schema.variables[v];
      if (spec.kind == VariableKind::kNumeric) {
        data.columns[v].numeric.push_back(parse_double(cell, "numeric value", row, spec.name));
      } else {
        int idx = spec.level_index(cell);
        if (idx < 0) {
          if (!collect_levels[v])
            throw Error("csv: unknown level '" + cell + "' for variable '" + spec.name +
                        "' at row " + std::to_string(row));
          if (spec.levels.size() >= 64)
            throw Error("csv: variable '" + spec.name + "' exceeds 64 levels");
          idx = static_cast<int>(spec.levels.size());
          spec.levels.push_back(cell);
        }
        data.columns[v].categorical.push_back(idx);
      }
    }

    const double claim = parse_double(cells[claims_col], "claim count", row, schema.response_column);
    if (claim < 0.0 || claim != std::floor(claim))
      throw Error("csv: claim count must be a non-negative integer at row " + std::to_string(row));
    data.claims.push_back(static_cast<std::int32_t>(claim));

    const double v = parse_double(cells[exposure_col], "exposure", row, schema.exposure_column);
    if (!(v > 0.0) || v > 1.0)
      throw Error("csv: exposure outside (0,1] at row " + std::to_string(row) + " column '" +
                  schema.exposure_column + "'");
    data.exposure.push_back(v);
  }
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("csv: cannot write '" + path + "'");
  for (std::size_t v = 0; v < data.schema.variables.size(); ++v)
    out << data.schema.variables[v].name << ',';
  out << data.schema.response_column << ',' << data.schema.exposure_column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t v = 0; v < data.schema.variables.size(); ++v) {
      const auto& spec = data.schema.variables[v];
      if (spec.kind == VariableKind::kNumeric) {
        std::snprintf(buf, sizeof buf, "%.17g", data.columns[v].numeric[i]);
        out << buf << ',';
      } else {
        out << spec.levels[data.columns[v].categorical[i]] << ',';
      }
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.exposure[i]);
    out << data.claims[i] << ',' << buf << '\n';
  }
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw Error("stratified_split: fraction must be in (0,1)");
  std::vector<std::int32_t> zero, pos;
  for (std::size_t i = 0; i < data.n_rows(); ++i)
    (data.claims[i] == 0 ? zero : pos).push_back(static_cast<std::int32_t>(i));

  Rng rng(Rng::derive_seed(seed, 0x53504c4954ULL));  // "SPLIT"
  std::vector<std::int32_t> train_rows, test_rows;
  for (auto* stratum : {&zero, &pos}) {
    auto& rows = *stratum;
    // Fisher-Yates with our deterministic source.
    for (std::size_t i = rows.size(); i > 1; --i)
      std::swap(rows[i - 1], rows[rng.uniform_int(i)]);
    const std::size_t k = static_cast<std::size_t>(train_fraction * static_cast<double>(rows.size()));
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + k);
    test_rows.insert(test_rows.end(), rows.begin() + k, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.subset(train_rows), data.subset(test_rows)};
}

}  // namespace bcart
