#include "tubalcast/traffic/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "tubalcast/error.hpp"
#include "tubalcast/rng.hpp"

namespace tubalcast::traffic {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_row(std::string_view line, std::size_t lineno) {
  std::vector<double> row;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    const std::string_view cell = trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    double v = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size())
      fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ", column " + std::to_string(row.size() + 1) +
                                      ": '" + std::string(cell) + "' is not a number");
    row.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return row;
}

double quantile(std::vector<double>& v, double q) {
  // linear interpolation between order statistics
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

}  // namespace

InputFormat input_format_from_string(std::string_view s) {
  if (s == "t3f") return InputFormat::t3f;
  if (s == "csv" || s == "csv_matrix_sequence") return InputFormat::csv_matrix_sequence;
  fail(ErrorKind::InvalidArgument, "unknown input format '" + std::string(s) + "' (expected t3f or csv)");
}

InputFormat guess_format(const std::filesystem::path& path) {
  return path.extension() == ".t3f" ? InputFormat::t3f : InputFormat::csv_matrix_sequence;
}

TrafficDataset parse_csv(std::istream& is, std::string name) {
  std::vector<double> values;  // (t, i, j) order while streaming
  std::size_t n = 0;
  std::size_t rows = 0;
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::vector<double> row = parse_row(s, lineno);
    if (n == 0) n = row.size();
    require(row.size() == n, ErrorKind::ParseError,
            "line " + std::to_string(lineno) + ": expected " + std::to_string(n) + " columns, found " + std::to_string(row.size()));
    for (std::size_t j = 0; j < n; ++j) {
      require(std::isfinite(row[j]), ErrorKind::ParseError,
              "line " + std::to_string(lineno) + ", column " + std::to_string(j + 1) + ": value is not finite");
      require(row[j] >= 0.0, ErrorKind::NegativeTraffic,
              "line " + std::to_string(lineno) + ", column " + std::to_string(j + 1) + " (matrix " +
                  std::to_string(rows / n + 1) + ", cell " + std::to_string(rows % n + 1) + "," + std::to_string(j + 1) +
                  "): negative volume " + std::to_string(row[j]));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  require(rows > 0, ErrorKind::ParseError, "no matrices in input");
  require(rows % n == 0, ErrorKind::ShapeError,
          std::to_string(rows) + " data rows is not a whole number of " + std::to_string(n) + "-row matrices");
  const std::size_t frames = rows / n;
  TrafficDataset d;
  d.name = std::move(name);
  d.n = n;
  d.data = Tensor3({n, n, frames});
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d.data(i, j, t) = values[(t * n + i) * n + j];
  return d;
}

void validate(const TrafficDataset& d) {
  const Dims3 dims = d.data.dims();
  require(dims.n1 == dims.n2 && dims.n1 == d.n && dims.n3 > 0, ErrorKind::ShapeError,
          "traffic data must be n x n x T, got " + to_string(dims));
  for (std::size_t i = 0; i < dims.n1; ++i)
    for (std::size_t j = 0; j < dims.n2; ++j)
      for (std::size_t t = 0; t < dims.n3; ++t) {
        const double v = d.data(i, j, t);
        require(std::isfinite(v), ErrorKind::NonFinite, "non-finite volume at matrix " + std::to_string(t + 1));
        require(v >= 0.0, ErrorKind::NegativeTraffic,
                "negative volume " + std::to_string(v) + " at matrix " + std::to_string(t + 1) + ", cell " +
                    std::to_string(i + 1) + "," + std::to_string(j + 1));
      }
}

TrafficDataset ingest(const std::filesystem::path& path, InputFormat format) {
  require(std::filesystem::exists(path), ErrorKind::IoError, "no such file '" + path.string() + "'");
  TrafficDataset d;
  if (format == InputFormat::t3f) {
    d.data = read_t3f(path.string());
    d.n = d.data.dims().n1;
    d.name = path.stem().string();
  } else {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorKind::IoError, "cannot open '" + path.string() + "'");
    d = parse_csv(is, path.stem().string());
  }
  validate(d);
  return d;
}

OutlierAction outlier_action_from_string(std::string_view s) {
  if (s == "zero_max_outlier" || s == "zero") return OutlierAction::zero_max_outlier;
  if (s == "none") return OutlierAction::none;
  fail(ErrorKind::InvalidArgument, "unknown outlier action '" + std::string(s) + "'");
}

double outlier_threshold(const Tensor3& data) {
  std::vector<double> pos;
  for (double v : data.data())
    if (v > 0.0) pos.push_back(v);
  if (pos.empty()) return std::numeric_limits<double>::infinity();
  std::vector<double> work = pos;
  const double med = quantile(work, 0.5);
  work = pos;
  const double q1 = quantile(work, 0.25);
  work = pos;
  const double q3 = quantile(work, 0.75);
  return med + 10.0 * (q3 - q1);
}

TrafficDataset preprocess(TrafficDataset d, OutlierAction action) {
  if (action == OutlierAction::zero_max_outlier) {
    const double cut = outlier_threshold(d.data);
    for (double& v : d.data.data())
      if (v > cut) v = 0.0;
  }
  const auto [lo, hi] = std::minmax_element(d.data.data().begin(), d.data.data().end());
  require(lo != d.data.data().end() && *hi > *lo, ErrorKind::DegenerateRange,
          "traffic data has a single value; cannot min-max normalize");
  d.norm = {*lo, *hi, true};
  for (double& v : d.data.data()) v = d.norm.normalize(v);
  return d;
}

void write_normalization(const std::filesystem::path& path, const Normalization& norm) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::IoError, "cannot write '" + path.string() + "'");
  os.precision(17);
  os << "min=" << norm.min << "\nmax=" << norm.max << "\napplied=" << (norm.applied ? 1 : 0) << "\n";
}

Normalization read_normalization(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::IoError, "cannot open '" + path.string() + "'");
  Normalization n;
  std::string line;
  bool have_min = false, have_max = false;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const double v = std::stod(line.substr(eq + 1));
    if (key == "min") n.min = v, have_min = true;
    else if (key == "max") n.max = v, have_max = true;
    else if (key == "applied") n.applied = v != 0.0;
  }
  require(have_min && have_max && (!n.applied || n.max > n.min), ErrorKind::FormatError,
          "bad normalization record '" + path.string() + "'");
  return n;
}

TrafficDataset synthetic_traffic(std::size_t n, std::size_t frames, std::size_t rank, std::uint64_t seed,
                                 double period, double noise) {
  require(n > 0 && frames > 0 && rank > 0 && period > 0.0 && noise >= 0.0, ErrorKind::InvalidArgument,
          "synthetic traffic needs positive sizes and noise >= 0");
  Rng rng = make_rng(seed, "synthetic");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // factor r is strongest between the nodes of group r (i mod rank == r)
  auto profile = [&](std::size_t r) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      v(static_cast<Eigen::Index>(i)) = 0.15 * unif(rng) + (i % rank == r ? 0.5 + 0.5 * unif(rng) : 0.0);
    return v;
  };
  std::vector<Eigen::VectorXd> a(rank), b(rank);
  for (std::size_t r = 0; r < rank; ++r) {
    a[r] = profile(r);
    b[r] = profile(r);
  }
  Rng noise_rng = make_rng(seed, "synthetic.noise");
  std::normal_distribution<double> gauss(0.0, 1.0);
  TrafficDataset d;
  d.name = "synthetic";
  d.n = n;
  d.data = Tensor3({n, n, frames});
  const double w = 2.0 * std::numbers::pi / period;
  for (std::size_t t = 0; t < frames; ++t) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < rank; ++r) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(rank);
      const double c = 1.0 + 0.3 * std::sin(w * static_cast<double>(t) + phase) +
                       0.1 * std::sin(2.0 * w * static_cast<double>(t) + 1.7 * phase);
      m += std::pow(0.6, static_cast<double>(r)) * c * a[r] * b[r].transpose();
    }
    if (noise > 0.0) m = m.unaryExpr([&](double x) { return std::max(0.0, x * (1.0 + noise * gauss(noise_rng))); });
    d.data.set_frontal_slice(t, m);
  }
  return d;
}

}  // namespace tubalcast::traffic
