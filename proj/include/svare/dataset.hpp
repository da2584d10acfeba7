#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace svare {

// One time group of a repeated cross-section: every row is a new item.
struct TimeGroup {
  std::string label;
  Eigen::VectorXd y;  // responses, already on the model (log10) scale
  Eigen::MatrixXd X;  // n_t x k design, no intercept column
};

struct Dataset {
  std::vector<TimeGroup> groups;             // sorted by label
  std::vector<std::string> covariate_names;  // k column labels

  int T() const { return static_cast<int>(groups.size()); }
  int k() const { return groups.empty() ? 0 : static_cast<int>(groups.front().X.cols()); }
  int n_total() const;
  std::vector<std::string> times() const;

  // Every group nonempty, dimensions consistent, all values finite.
  void validate() const;
};

// Covariate coding: categorical variables expand to one dummy column per
// non-baseline category (all-zero row = baseline); numeric variables pass
// through. Emitted column order is variables in plan order, categories in
// listed order.
struct CodingVariable {
  std::string name;
  bool categorical = false;
  std::vector<std::string> categories;  // includes the baseline
  std::string baseline;
};

struct CodingPlan {
  std::vector<CodingVariable> variables;

  std::vector<std::string> column_names() const;
  int n_columns() const { return static_cast<int>(column_names().size()); }
};

// Column names from the header row of a CSV file.
std::vector<std::string> csv_header(const std::string& path);

// Errors carry the offending row (1-based, counting the header) and column.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Dataset load_csv(const std::string& path, const CodingPlan& plan,
                 const std::string& time_col, const std::string& response_col,
                 bool log10_transform);

// Inverse of load_csv for an already-encoded Dataset: time, response and the
// encoded covariate columns, full double precision so a reload (all-numeric
// plan, no transform) reproduces the matrices bit-for-bit.
void write_csv(const Dataset& d, const std::string& path,
               const std::string& time_col = "time",
               const std::string& response_col = "response");

// Covariate rows for forecasting: same CSV schema as load_csv but without
// grouping; the response column is optional (has_response reports whether it
// was present) and the time column is ignored if present.
struct NewRows {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  bool has_response = false;
  std::vector<std::string> labels;  // time labels when a time column exists
};

NewRows load_rows(const std::string& path, const CodingPlan& plan,
                  const std::string& response_col, bool log10_transform,
                  const std::string& time_col = "");

struct HoldoutSplit {
  Dataset train;
  Dataset test;
};

// Moves the entire final time group into the test set. Requires T >= 3.
HoldoutSplit split_last_period(const Dataset& d);

// Removes `count` rows uniformly at random without emptying any group.
HoldoutSplit split_random_rows(const Dataset& d, int count, std::uint64_t seed);

}  // namespace svare
