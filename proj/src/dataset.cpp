#include "svare/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "svare/rng.hpp"

namespace svare {

namespace {

// Natural order: digit runs compare as integers, everything else
// lexicographically. Equivalent to zero-padding the numeric parts, so
// "1998-2" < "1998-10" and "t2" < "t10".
bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ia = i, jb = j;
      while (ia < a.size() && std::isdigit(static_cast<unsigned char>(a[ia]))) ++ia;
      while (jb < b.size() && std::isdigit(static_cast<unsigned char>(b[jb]))) ++jb;
      std::size_t sa = i, sb = j;
      while (sa < ia - 1 && a[sa] == '0') ++sa;  // strip leading zeros
      while (sb < jb - 1 && b[sb] == '0') ++sb;
      const std::size_t la = ia - sa, lb = jb - sb;
      if (la != lb) return la < lb;
      const int cmp = a.compare(sa, la, b, sb, lb);
      if (cmp != 0) return cmp < 0;
      i = ia;
      j = jb;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, int row, const std::string& col) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
    throw LoadError("row " + std::to_string(row) + ", column '" + col +
                    "': cannot parse '" + s + "' as a finite number");
  return value;
}

std::string needs_quoting(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

int Dataset::n_total() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.y.size());
  return n;
}

std::vector<std::string> Dataset::times() const {
  std::vector<std::string> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.label);
  return out;
}

void Dataset::validate() const {
  if (groups.empty()) throw std::invalid_argument("Dataset: no time groups");
  const int kk = k();
  for (const auto& g : groups) {
    if (g.y.size() < 1) throw std::invalid_argument("Dataset: empty group '" + g.label + "'");
    if (g.X.rows() != g.y.size() || g.X.cols() != kk)
      throw std::invalid_argument("Dataset: inconsistent dimensions in group '" + g.label + "'");
    if (!g.y.allFinite() || !g.X.allFinite())
      throw std::invalid_argument("Dataset: non-finite value in group '" + g.label + "'");
  }
  if (static_cast<int>(covariate_names.size()) != kk)
    throw std::invalid_argument("Dataset: covariate_names size mismatch");
}

std::vector<std::string> CodingPlan::column_names() const {
  std::vector<std::string> names;
  for (const auto& v : variables) {
    if (!v.categorical) {
      names.push_back(v.name);
      continue;
    }
    for (const auto& cat : v.categories)
      if (cat != v.baseline) names.push_back(v.name + ":" + cat);
  }
  return names;
}

std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw LoadError("'" + path + "': empty file");
  return split_csv_line(line);
}

Dataset load_csv(const std::string& path, const CodingPlan& plan,
                 const std::string& time_col, const std::string& response_col,
                 bool log10_transform) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw LoadError("'" + path + "': empty file");
  const auto header = split_csv_line(line);

  const auto col_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw LoadError("'" + path + "': missing column '" + name + "'");
    return static_cast<int>(it - header.begin());
  };

  const int time_idx = col_index(time_col);
  const int resp_idx = col_index(response_col);
  struct VarSlot {
    const CodingVariable* var;
    int col;
  };
  std::vector<VarSlot> slots;
  for (const auto& v : plan.variables) slots.push_back({&v, col_index(v.name)});

  struct Row {
    double y;
    Eigen::RowVectorXd x;
  };
  std::map<std::string, std::vector<Row>, decltype(&natural_less)> by_time(&natural_less);

  const int k = plan.n_columns();
  int row_no = 1;  // header
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw LoadError("row " + std::to_string(row_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));

    Row row;
    row.y = parse_double(fields[resp_idx], row_no, response_col);
    if (log10_transform) {
      if (!(row.y > 0.0))
        throw LoadError("row " + std::to_string(row_no) + ", column '" + response_col +
                        "': non-positive response under log transform");
      row.y = std::log10(row.y);
    }

    row.x = Eigen::RowVectorXd::Zero(k);
    int col = 0;
    for (const auto& slot : slots) {
      const std::string& field = fields[slot.col];
      if (!slot.var->categorical) {
        row.x[col++] = parse_double(field, row_no, slot.var->name);
        continue;
      }
      const auto& cats = slot.var->categories;
      const auto it = std::find(cats.begin(), cats.end(), field);
      if (it == cats.end())
        throw LoadError("row " + std::to_string(row_no) + ", column '" + slot.var->name +
                        "': unknown category '" + field + "'");
      for (const auto& cat : cats) {
        if (cat == slot.var->baseline) continue;
        row.x[col++] = (cat == field) ? 1.0 : 0.0;
      }
    }
    by_time[fields[time_idx]].push_back(std::move(row));
  }

  if (by_time.size() < 2) throw LoadError("'" + path + "': need at least 2 time groups");

  Dataset d;
  d.covariate_names = plan.column_names();
  for (auto& [label, rows] : by_time) {
    TimeGroup g;
    g.label = label;
    g.y.resize(rows.size());
    g.X.resize(rows.size(), k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      g.y[i] = rows[i].y;
      g.X.row(i) = rows[i].x;
    }
    d.groups.push_back(std::move(g));
  }
  d.validate();
  return d;
}

NewRows load_rows(const std::string& path, const CodingPlan& plan,
                  const std::string& response_col, bool log10_transform,
                  const std::string& time_col) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw LoadError("'" + path + "': empty file");
  const auto header = split_csv_line(line);

  const auto find_col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int resp_idx = find_col(response_col);
  const int time_idx = time_col.empty() ? -1 : find_col(time_col);

  struct VarSlot {
    const CodingVariable* var;
    int col;
  };
  std::vector<VarSlot> slots;
  for (const auto& v : plan.variables) {
    const int idx = find_col(v.name);
    if (idx < 0) throw LoadError("'" + path + "': missing column '" + v.name + "'");
    slots.push_back({&v, idx});
  }

  NewRows out;
  out.has_response = resp_idx >= 0;
  const int k = plan.n_columns();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> ys;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw LoadError("row " + std::to_string(row_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));

    if (out.has_response) {
      double y = parse_double(fields[resp_idx], row_no, response_col);
      if (log10_transform) {
        if (!(y > 0.0))
          throw LoadError("row " + std::to_string(row_no) + ", column '" + response_col +
                          "': non-positive response under log transform");
        y = std::log10(y);
      }
      ys.push_back(y);
    }
    if (time_idx >= 0) out.labels.push_back(fields[time_idx]);

    Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(k);
    int col = 0;
    for (const auto& slot : slots) {
      const std::string& field = fields[slot.col];
      if (!slot.var->categorical) {
        x[col++] = parse_double(field, row_no, slot.var->name);
        continue;
      }
      const auto& cats = slot.var->categories;
      const auto it = std::find(cats.begin(), cats.end(), field);
      if (it == cats.end())
        throw LoadError("row " + std::to_string(row_no) + ", column '" + slot.var->name +
                        "': unknown category '" + field + "'");
      for (const auto& cat : cats) {
        if (cat == slot.var->baseline) continue;
        x[col++] = (cat == field) ? 1.0 : 0.0;
      }
    }
    rows.push_back(std::move(x));
  }

  if (rows.empty()) throw LoadError("'" + path + "': no data rows");
  out.X.resize(rows.size(), k);
  for (std::size_t i = 0; i < rows.size(); ++i) out.X.row(i) = rows[i];
  if (out.has_response) out.y = Eigen::Map<Eigen::VectorXd>(ys.data(), ys.size());
  return out;
}

void write_csv(const Dataset& d, const std::string& path,
               const std::string& time_col, const std::string& response_col) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");

  out << needs_quoting(time_col) << "," << needs_quoting(response_col);
  for (const auto& name : d.covariate_names) out << "," << needs_quoting(name);
  out << "\n";

  char buf[40];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& g : d.groups) {
    for (Eigen::Index i = 0; i < g.y.size(); ++i) {
      out << needs_quoting(g.label) << "," << fmt(g.y[i]);
      for (Eigen::Index j = 0; j < g.X.cols(); ++j) out << "," << fmt(g.X(i, j));
      out << "\n";
    }
  }
}

HoldoutSplit split_last_period(const Dataset& d) {
  d.validate();
  if (d.T() < 3)
    throw std::invalid_argument("split_last_period: need T >= 3, got " + std::to_string(d.T()));
  HoldoutSplit s;
  s.train = d;
  s.test.covariate_names = d.covariate_names;
  s.test.groups.push_back(s.train.groups.back());
  s.train.groups.pop_back();
  return s;
}

HoldoutSplit split_random_rows(const Dataset& d, int count, std::uint64_t seed) {
  d.validate();
  const int max_removable = d.n_total() - d.T();
  if (count < 0 || count > max_removable)
    throw std::invalid_argument("split_random_rows: count " + std::to_string(count) +
                                " outside [0, " + std::to_string(max_removable) +
                                "] (cannot empty a group)");

  struct Cell {
    int t;
    int i;
  };
  std::vector<Cell> pool;
  std::vector<int> remaining(d.T());
  for (int t = 0; t < d.T(); ++t) {
    remaining[t] = static_cast<int>(d.groups[t].y.size());
    for (int i = 0; i < remaining[t]; ++i) pool.push_back({t, i});
  }

  Philox rng(seed, /*stream=*/0x686f6c64u);  // holdout stream
  std::vector<std::vector<bool>> removed(d.T());
  for (int t = 0; t < d.T(); ++t) removed[t].assign(d.groups[t].y.size(), false);

  int taken = 0;
  while (taken < count) {
    const std::size_t r = static_cast<std::size_t>(rng.next_below(pool.size()));
    const Cell c = pool[r];
    pool[r] = pool.back();
    pool.pop_back();
    if (remaining[c.t] <= 1) continue;  // would empty the group; drop candidate
    removed[c.t][c.i] = true;
    --remaining[c.t];
    ++taken;
  }

  HoldoutSplit s;
  s.train.covariate_names = d.covariate_names;
  s.test.covariate_names = d.covariate_names;
  for (int t = 0; t < d.T(); ++t) {
    const auto& g = d.groups[t];
    const int n = static_cast<int>(g.y.size());
    const int n_test = n - remaining[t];
    TimeGroup train_g, test_g;
    train_g.label = test_g.label = g.label;
    train_g.y.resize(remaining[t]);
    train_g.X.resize(remaining[t], g.X.cols());
    test_g.y.resize(n_test);
    test_g.X.resize(n_test, g.X.cols());
    int a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      if (removed[t][i]) {
        test_g.y[b] = g.y[i];
        test_g.X.row(b++) = g.X.row(i);
      } else {
        train_g.y[a] = g.y[i];
        train_g.X.row(a++) = g.X.row(i);
      }
    }
    s.train.groups.push_back(std::move(train_g));
    if (n_test > 0) s.test.groups.push_back(std::move(test_g));
  }
  return s;
}

}  // namespace svare
