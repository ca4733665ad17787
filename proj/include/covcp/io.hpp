#ifndef COVCP_IO_HPP
#define COVCP_IO_HPP

// File ingestion and report serialization.
//
// Matrices are CSV with rows = time and columns = coordinates. A first row
// containing any non-numeric cell is taken as a header and skipped. Vectors
// hold one value per line. Machine output prints doubles with 17 significant
// digits, so every value survives a decimal round trip.

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "covcp/cptest.hpp"
#include "covcp/errors.hpp"
#include "covcp/harness.hpp"
#include "covcp/limits.hpp"
#include "covcp/types.hpp"

namespace covcp {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

[[noreturn]] inline void ingest_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw IngestError("io", path + ":" + std::to_string(line) + ": " + what);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("io", path + ": cannot open file");
  return in;
}

}  // namespace detail

/// Formats a double with 17 significant digits.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Formats a double with 4 significant digits for human tables.
inline std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    std::vector<double> row;
    row.reserve(cells.size());
    std::optional<std::size_t> bad;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v) {
        bad = c;
        break;
      }
      row.push_back(*v);
    }
    if (bad) {
      if (first_content) {
        first_content = false;
        continue;  // header row
      }
      detail::ingest_fail(path, line_no, "column " + std::to_string(*bad + 1) + ": non-numeric cell '" +
                                             std::string(detail::trim(cells[*bad])) + "'");
    }
    first_content = false;
    if (rows == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      detail::ingest_fail(path, line_no, "ragged row: " + std::to_string(row.size()) + " columns, expected " +
                                             std::to_string(cols));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw IngestError("io", path + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

inline Vector read_vector_file(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<double> values;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto v = detail::parse_double(line);
    if (!v) detail::ingest_fail(path, line_no, "non-numeric value '" + std::string(detail::trim(line)) + "'");
    values.push_back(*v);
  }
  if (values.empty()) throw IngestError("io", path + ": no values");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) line += ',';
      line += format_double(m(i, c));
    }
    line += '\n';
    os << line;
  }
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IngestError("io", path + ": cannot open file for writing");
  write_matrix_csv(out, m);
}

inline void write_vector_file(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw IngestError("io", path + ": cannot open file for writing");
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

struct DataBundle {
  std::vector<Matrix> samples;
  std::vector<std::string> sample_paths;
  std::vector<Vector> projections;
  std::optional<std::size_t> learning_length;

  std::size_t K() const { return samples.size(); }
  std::size_t dim() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().cols()); }

  Panel panel() const {
    Panel p;
    p.samples = samples;
    p.config.K = samples.size();
    p.config.d = dim();
    for (const auto& s : samples) p.config.N.push_back(static_cast<std::size_t>(s.rows()));
    return p;
  }
};

struct BundleOptions {
  std::vector<std::string> sample_paths;
  std::vector<std::string> projection_paths;
  std::optional<std::size_t> learning_length;
};

inline DataBundle load_bundle(const BundleOptions& options) {
  if (options.sample_paths.empty()) throw ConfigError("io", "no sample files given");
  DataBundle b;
  b.learning_length = options.learning_length;
  for (const auto& path : options.sample_paths) {
    Matrix m = read_matrix_csv(path);
    if (!b.samples.empty() && m.cols() != b.samples.front().cols()) {
      throw IngestError("io", path + ": " + std::to_string(m.cols()) + " columns, expected d = " +
                                  std::to_string(b.samples.front().cols()) + " from " + b.sample_paths.front());
    }
    b.samples.push_back(std::move(m));
    b.sample_paths.push_back(path);
  }
  for (const auto& path : options.projection_paths) {
    Vector v = read_vector_file(path);
    if (static_cast<std::size_t>(v.size()) != b.dim()) {
      throw IngestError("io", path + ": vector has length " + std::to_string(v.size()) + ", expected d = " +
                                  std::to_string(b.dim()));
    }
    b.projections.push_back(std::move(v));
  }
  if (b.learning_length) {
    for (std::size_t j = 0; j < b.K(); ++j) {
      if (*b.learning_length >= static_cast<std::size_t>(b.samples[j].rows())) {
        throw ConfigError("io", "learning length " + std::to_string(*b.learning_length) + " not below the " +
                                    std::to_string(b.samples[j].rows()) + " rows of " + b.sample_paths[j]);
      }
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Reports.

inline nlohmann::ordered_json to_json(const TestReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(r.kind);
  j["statistic"] = r.statistic;
  j["critical_value"] = r.critical_value;
  j["level"] = r.level;
  j["reject"] = r.reject;
  j["lrv_mode"] = to_string(r.lrv_mode);
  j["learning_length"] = r.learning_length;
  j["n_grid"] = r.n_grid;
  j["n_rep"] = r.n_rep;
  j["seed"] = r.seed;
  auto& per = j["per_sample"] = nlohmann::ordered_json::array();
  for (const auto& s : r.per_sample) {
    nlohmann::ordered_json e;
    e["n"] = s.n;
    e["alpha_sq"] = s.lrv.alpha_sq;
    e["bandwidth"] = s.lrv.bandwidth;
    e["n_lags"] = s.lrv.n_lags;
    e["lrv_degenerate"] = s.lrv.degenerate;
    e["argmax_k"] = s.argmax_k;
    e["contribution"] = s.contribution;
    e["projection_hash"] = s.projection_hash;
    per.push_back(std::move(e));
  }
  return j;
}

inline void print_report_table(std::ostream& os, const TestReport& r) {
  os << "test " << to_string(r.kind) << "  level " << format_short(r.level) << "  lrv " << to_string(r.lrv_mode)
     << "\n";
  os << "statistic       " << format_short(r.statistic) << "\n";
  os << "critical value  " << format_short(r.critical_value) << "\n";
  os << "decision        " << (r.reject ? "reject" : "do not reject") << "\n";
  os << "sample       n    alpha^2  bandwidth  argmax_k\n";
  for (std::size_t j = 0; j < r.per_sample.size(); ++j) {
    const auto& s = r.per_sample[j];
    char buf[128];
    std::snprintf(buf, sizeof buf, "%6zu %7zu %10.4g %10.4g %9zu\n", j, s.n, s.lrv.alpha_sq, s.lrv.bandwidth,
                  s.argmax_k);
    os << buf;
  }
}

inline void write_critval_csv(std::ostream& os, const std::vector<CritValRow>& rows) {
  os << "kind,K,level,value,n_grid,n_rep,seed\n";
  for (const auto& r : rows) {
    os << to_string(r.kind) << ',' << r.K << ',' << format_double(r.level) << ',' << format_double(r.value) << ','
       << r.n_grid << ',' << r.n_rep << ',' << r.seed << '\n';
  }
}

inline void print_critval_table(std::ostream& os, const std::vector<CritValRow>& rows) {
  os << "kind        K   level   value\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-9s %3zu %7.4g %7.4g\n", to_string(r.kind), r.K, r.level, r.value);
    os << buf;
  }
}

inline void write_experiment_csv(std::ostream& os, const ExperimentResult& res) {
  os << "case,d,scenario,change_time,test,lrv_mode,learning_length,n,rejections,skipped,rate,stderr,cell_seed,"
        "seed,config_hash\n";
  for (const auto& c : res.cells) {
    os << to_string(c.sample_case) << ',' << c.d << ',' << to_string(c.scenario) << ','
       << (c.change_time ? format_double(*c.change_time) : std::string()) << ',' << to_string(c.test) << ','
       << to_string(res.lrv_mode) << ',' << res.learning_length << ',' << c.n << ',' << c.rejections << ','
       << c.skipped << ',' << format_double(c.rate) << ',' << format_double(c.stderr_rate) << ',' << c.cell_seed
       << ',' << res.seed << ',' << res.config_hash << '\n';
  }
}

/// Machine-readable result. Wall time is left out so reruns compare equal byte for byte.
inline nlohmann::ordered_json to_json(const ExperimentResult& res) {
  nlohmann::ordered_json j;
  j["seed"] = res.seed;
  j["config_hash"] = res.config_hash;
  j["lrv_mode"] = to_string(res.lrv_mode);
  j["learning_length"] = res.learning_length;
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : res.cells) {
    nlohmann::ordered_json e;
    e["case"] = to_string(c.sample_case);
    e["d"] = c.d;
    e["scenario"] = to_string(c.scenario);
    e["change_time"] = c.change_time ? nlohmann::ordered_json(*c.change_time) : nlohmann::ordered_json();
    e["test"] = to_string(c.test);
    e["n"] = c.n;
    e["rejections"] = c.rejections;
    e["skipped"] = c.skipped;
    e["rate"] = c.rate;
    e["stderr"] = c.stderr_rate;
    e["cell_seed"] = c.cell_seed;
    cells.push_back(std::move(e));
  }
  j["log"] = res.log;
  return j;
}

inline void print_experiment_table(std::ostream& os, const ExperimentResult& res) {
  os << "case      d  scenario            time  test          n    rate  stderr\n";
  for (const auto& c : res.cells) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-5s %6zu  %-18s %5s  %-8s %7zu %7.4g %7.4g\n", to_string(c.sample_case).c_str(),
                  c.d, to_string(c.scenario), c.change_time ? format_short(*c.change_time).c_str() : "-",
                  to_string(c.test), c.n, c.rate, c.stderr_rate);
    os << buf;
  }
}

}  // namespace covcp

#endif  // COVCP_IO_HPP
