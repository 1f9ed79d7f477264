#ifndef SCCA_DATA_HPP
#define SCCA_DATA_HPP

// Paired data ingestion and row bookkeeping.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scca/error.hpp"

namespace scca {

/// n paired observations of X (p columns) and Y (q columns).
///
/// Storage is column-major per block so that covariance accumulation
/// streams down columns. Immutable after construction.
class PairedDataset {
 public:
  PairedDataset(Eigen::MatrixXd x, Eigen::MatrixXd y,
                std::vector<std::string> x_names = {},
                std::vector<std::string> y_names = {})
      : x_(std::move(x)), y_(std::move(y)),
        x_names_(std::move(x_names)), y_names_(std::move(y_names)) {
    if (x_.rows() != y_.rows())
      fail(ErrorKind::kValidation,
           "row-count mismatch: X has " + std::to_string(x_.rows()) +
               " rows, Y has " + std::to_string(y_.rows()));
    if (x_.rows() < 3)
      fail(ErrorKind::kValidation, "need at least 3 observations, got " +
                                       std::to_string(x_.rows()));
    if (x_.cols() < 1 || y_.cols() < 1)
      fail(ErrorKind::kValidation, "both blocks need at least one column");
    if (!x_.allFinite()) fail(ErrorKind::kValidation, "X contains non-finite values");
    if (!y_.allFinite()) fail(ErrorKind::kValidation, "Y contains non-finite values");
    if (x_names_.empty()) x_names_ = synth_names("X", x_.cols());
    if (y_names_.empty()) y_names_ = synth_names("Y", y_.cols());
    check_names(x_names_, x_.cols(), "X");
    check_names(y_names_, y_.cols(), "Y");
  }

  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const Eigen::MatrixXd& y() const noexcept { return y_; }
  const std::vector<std::string>& x_names() const noexcept { return x_names_; }
  const std::vector<std::string>& y_names() const noexcept { return y_names_; }

  Eigen::Index n() const noexcept { return x_.rows(); }
  Eigen::Index p() const noexcept { return x_.cols(); }
  Eigen::Index q() const noexcept { return y_.cols(); }

  bool operator==(const PairedDataset& o) const {
    return x_names_ == o.x_names_ && y_names_ == o.y_names_ &&
           x_.rows() == o.x_.rows() && x_.cols() == o.x_.cols() &&
           y_.cols() == o.y_.cols() && x_ == o.x_ && y_ == o.y_;
  }

 private:
  static std::vector<std::string> synth_names(const std::string& prefix,
                                              Eigen::Index count) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i)
      out.push_back(prefix + std::to_string(i + 1));
    return out;
  }

  static void check_names(const std::vector<std::string>& names,
                          Eigen::Index count, const char* block) {
    if (static_cast<Eigen::Index>(names.size()) != count)
      fail(ErrorKind::kValidation, std::string(block) + ": " +
                                       std::to_string(names.size()) +
                                       " labels for " + std::to_string(count) +
                                       " columns");
    std::set<std::string> seen;
    for (const auto& name : names)
      if (!seen.insert(name).second)
        fail(ErrorKind::kValidation,
             std::string(block) + ": duplicate column label '" + name + "'");
  }

  Eigen::MatrixXd x_;
  Eigen::MatrixXd y_;
  std::vector<std::string> x_names_;
  std::vector<std::string> y_names_;
};

/// A row permutation together with the seed that produced it.
struct Ordering {
  std::vector<Eigen::Index> permutation;  // new row i = old row permutation[i]
  std::uint64_t seed = 0;

  static Ordering identity(Eigen::Index n) {
    Ordering o;
    o.permutation.resize(static_cast<std::size_t>(n));
    std::iota(o.permutation.begin(), o.permutation.end(), Eigen::Index{0});
    return o;
  }

  static Ordering reversed(Eigen::Index n) {
    Ordering o = identity(n);
    std::reverse(o.permutation.begin(), o.permutation.end());
    return o;
  }

  // Fisher-Yates driven by mt19937_64; same seed, same permutation.
  static Ordering random(Eigen::Index n, std::uint64_t seed) {
    Ordering o = identity(n);
    o.seed = seed;
    std::mt19937_64 rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<Eigen::Index> pick(0, i);
      std::swap(o.permutation[static_cast<std::size_t>(i)],
                o.permutation[static_cast<std::size_t>(pick(rng))]);
    }
    return o;
  }

  bool is_bijection() const {
    std::vector<char> hit(permutation.size(), 0);
    for (auto idx : permutation) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= permutation.size() ||
          hit[static_cast<std::size_t>(idx)])
        return false;
      hit[static_cast<std::size_t>(idx)] = 1;
    }
    return true;
  }
};

inline PairedDataset reorder(const PairedDataset& data, const Ordering& ordering) {
  if (static_cast<Eigen::Index>(ordering.permutation.size()) != data.n())
    fail(ErrorKind::kValidation,
         "ordering length " + std::to_string(ordering.permutation.size()) +
             " does not match n = " + std::to_string(data.n()));
  if (!ordering.is_bijection())
    fail(ErrorKind::kValidation, "ordering is not a permutation of the rows");
  Eigen::MatrixXd x(data.n(), data.p());
  Eigen::MatrixXd y(data.n(), data.q());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const auto src = ordering.permutation[static_cast<std::size_t>(i)];
    x.row(i) = data.x().row(src);
    y.row(i) = data.y().row(src);
  }
  return PairedDataset(std::move(x), std::move(y), data.x_names(), data.y_names());
}

struct BoundWarning {
  char block;  // 'X' or 'Y'
  Eigen::Index column;
  std::string name;
  double min;
  double max;
};

// Columns whose empirical range leaves [-1, 1]. Reported, never enforced.
inline std::vector<BoundWarning> bound_check(const PairedDataset& data) {
  std::vector<BoundWarning> out;
  auto scan = [&out](const Eigen::MatrixXd& m, const std::vector<std::string>& names,
                     char block) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double lo = m.col(c).minCoeff();
      const double hi = m.col(c).maxCoeff();
      if (lo < -1.0 || hi > 1.0)
        out.push_back({block, c, names[static_cast<std::size_t>(c)], lo, hi});
    }
  };
  scan(data.x(), data.x_names(), 'X');
  scan(data.y(), data.y_names(), 'Y');
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos
                                                ? std::string_view::npos
                                                : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

struct CsvTable {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
};

inline CsvTable read_csv_block(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");

  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = header;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.size() >= 3 &&
        static_cast<unsigned char>(view[0]) == 0xEF)  // UTF-8 BOM
      view.remove_prefix(3);
    if (view.empty()) continue;
    const auto cells = split_commas(view);
    if (header_pending) {
      for (auto c : cells) {
        if (c.size() >= 2 && c.front() == '"' && c.back() == '"')
          c = c.substr(1, c.size() - 2);
        table.names.emplace_back(c);
      }
      width = cells.size();
      header_pending = false;
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      fail(ErrorKind::kValidation,
           path + ":" + std::to_string(line_no) + ": expected " +
               std::to_string(width) + " cells, found " + std::to_string(cells.size()));
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const auto cell = cells[c];
      std::string_view digits = cell;
      if (digits.size() > 1 && digits.front() == '+') digits.remove_prefix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != digits.data() + digits.size() ||
          !std::isfinite(v))
        fail(ErrorKind::kValidation,
             path + ": non-numeric cell '" + std::string(cell) + "' at row " +
                 std::to_string(rows.size() + 1) + ", column " + std::to_string(c + 1));
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::kValidation, path + ": no data rows");

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

inline void write_csv_block(const std::string& path, const Eigen::MatrixXd& m,
                            const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path + "'");
}

}  // namespace detail

/// Load X and Y from two CSV files. Labels come from the header line when
/// `header` is set, otherwise X1..Xp / Y1..Yq are synthesized.
inline PairedDataset load_csv(const std::string& path_x, const std::string& path_y,
                              bool header = true) {
  auto tx = detail::read_csv_block(path_x, header);
  auto ty = detail::read_csv_block(path_y, header);
  if (tx.values.rows() != ty.values.rows())
    fail(ErrorKind::kValidation,
         "row-count mismatch: '" + path_x + "' has " + std::to_string(tx.values.rows()) +
             " rows, '" + path_y + "' has " + std::to_string(ty.values.rows()));
  return PairedDataset(std::move(tx.values), std::move(ty.values),
                       std::move(tx.names), std::move(ty.names));
}

/// Write both blocks with a header line; values round-trip exactly.
inline void write_csv(const PairedDataset& data, const std::string& path_x,
                      const std::string& path_y) {
  detail::write_csv_block(path_x, data.x(), data.x_names());
  detail::write_csv_block(path_y, data.y(), data.y_names());
}

}  // namespace scca

#endif  // SCCA_DATA_HPP
