#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcart/common.hpp"

namespace bcart {

enum class VariableKind { kNumeric, kCategorical };

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::kNumeric;
  // Categorical level labels; declaration order breaks frequency ties.
  std::vector<std::string> levels;

  int level_index(const std::string& label) const;
};

struct CovariateSchema {
  std::vector<VariableSpec> variables;
  std::string response_column;
  std::string exposure_column;

  int variable_index(const std::string& name) const;
  void validate() const;
};

// Column-major training/test data. Categorical cells hold level indices
// into the schema's declared level list.
struct Column {
  std::vector<double> numeric;
  std::vector<std::int32_t> categorical;
};

struct Dataset {
  CovariateSchema schema;
  std::vector<Column> columns;     // one per schema variable
  std::vector<std::int32_t> claims;
  std::vector<double> exposure;

  std::size_t n_rows() const { return claims.size(); }
  std::size_t n_variables() const { return schema.variables.size(); }

  double numeric_value(std::size_t var, std::size_t row) const { return columns[var].numeric[row]; }
  std::int32_t level_of(std::size_t var, std::size_t row) const { return columns[var].categorical[row]; }

  Dataset subset(const std::vector<std::int32_t>& rows) const;
  void validate() const;
};

// Parses a CSV with a header row against the declared schema. Unknown
// categorical labels extend the level set only when the schema declared no
// levels for that variable (collection order = first appearance).
Dataset load_csv(const std::string& path, const CovariateSchema& schema);

void save_csv(const Dataset& data, const std::string& path);

// Splits zero-claim and positive-claim rows independently at the fraction,
// so both sides keep the claim balance. Deterministic in the seed.
std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double train_fraction,
                                             std::uint64_t seed);

}  // namespace bcart
