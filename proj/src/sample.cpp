#include "iterfunc/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

void EstimationConfig::validate() const {
  if (grid_points < 3) throw std::invalid_argument("config: grid_points < 3");
  if (!(alpha_lo > 0.0 && alpha_lo < alpha_hi && alpha_hi < 1.0))
    throw std::invalid_argument("config: need 0 < alpha_lo < alpha_hi < 1");
  if (!(beta_var_tol > 0.0))
    throw std::invalid_argument("config: beta_var_tol must be positive");
  if (!(iter_cap_factor > 0.0))
    throw std::invalid_argument("config: iter_cap_factor must be positive");
  if (bandwidth.method == BandwidthChoice::fixed && !(bandwidth.value > 0.0))
    throw std::invalid_argument("config: fixed bandwidth must be positive");
  if (bootstrap_reps < 100)
    throw std::invalid_argument("config: bootstrap_reps < 100");
  if (quadrature_points < 16)
    throw std::invalid_argument("config: quadrature_points < 16");
}

std::vector<double> EstimationConfig::alpha_grid() const {
  return linspace(alpha_lo, alpha_hi, static_cast<std::size_t>(grid_points));
}

int EstimationConfig::iteration_cap(std::size_t n) const {
  const double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 3)));
  return static_cast<int>(std::ceil(iter_cap_factor * ln));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

}  // namespace

Sample load_sample(const std::string& path,
                   const std::map<std::string, ColumnRole>& column_map) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty sample file: " + path);
  const auto header = split_csv_line(line);

  int qcol = -1, pcol = -1, xcol = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto it = column_map.find(header[j]);
    if (it == column_map.end()) continue;
    switch (it->second) {
      case ColumnRole::quantity: qcol = static_cast<int>(j); break;
      case ColumnRole::price: pcol = static_cast<int>(j); break;
      case ColumnRole::covariate: xcol = static_cast<int>(j); break;
    }
  }
  if (qcol < 0)
    throw std::runtime_error("sample file " + path + ": no quantity column");

  Sample s;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    auto cell = [&](int j) -> std::string {
      return j >= 0 && j < static_cast<int>(cells.size()) ? cells[j]
                                                          : std::string();
    };
    const std::string qs = cell(qcol);
    if (qs.empty()) continue;  // missing quantity: row rejected
    double q;
    if (!parse_double(qs, q))
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ", column '" + header[qcol] +
                               "': unparsable value '" + qs + "'");
    if (!std::isfinite(q) || q < 0.0)
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": quantity must be finite and nonnegative");
    double p = 0.0, x = 0.0;
    bool has_p = false, has_x = false;
    if (pcol >= 0) {
      const std::string ps = cell(pcol);
      if (!ps.empty()) {
        if (!parse_double(ps, p))
          throw std::runtime_error(path + ": row " + std::to_string(row) +
                                   ", column '" + header[pcol] +
                                   "': unparsable value '" + ps + "'");
        has_p = true;
      }
    }
    if (xcol >= 0) {
      const std::string xs = cell(xcol);
      if (!xs.empty()) {
        if (!parse_double(xs, x))
          throw std::runtime_error(path + ": row " + std::to_string(row) +
                                   ", column '" + header[xcol] +
                                   "': unparsable value '" + xs + "'");
        if (!(x >= 0.0) || x != std::floor(x))
          throw std::runtime_error(path + ": row " + std::to_string(row) +
                                   ": covariate must be a nonnegative integer");
        has_x = true;
      }
    }
    s.quantities.push_back(q);
    if (pcol >= 0) s.prices.push_back(has_p ? p : 0.0);
    if (xcol >= 0) s.covariates.push_back(has_x ? x : 0.0);
  }
  if (s.quantities.empty())
    throw std::runtime_error("sample file " + path + ": no usable rows");
  return s;
}

Sample load_sample(const std::string& path) {
  return load_sample(path, {{"q", ColumnRole::quantity},
                            {"p", ColumnRole::price},
                            {"x", ColumnRole::covariate}});
}

void save_sample(const Sample& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sample file: " + path);
  out << "q";
  if (s.has_prices()) out << ",p";
  if (s.has_covariates()) out << ",x";
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", s.quantities[i]);
    out << buf;
    if (s.has_prices()) {
      std::snprintf(buf, sizeof buf, "%.17g", s.prices[i]);
      out << ',' << buf;
    }
    if (s.has_covariates()) {
      std::snprintf(buf, sizeof buf, "%.17g", s.covariates[i]);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Sample normalize_sample(Sample s) {
  if (s.normalized) return s;  // one-shot preprocessing
  const std::size_t n = s.size();
  if (n == 0) throw std::invalid_argument("normalize_sample: empty sample");

  Sample out;
  out.period = s.period;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.quantities[i] == 0.0) {
      ++zeros;
      continue;
    }
    out.quantities.push_back(s.quantities[i]);
    if (s.has_prices()) out.prices.push_back(s.prices[i]);
    if (s.has_covariates()) out.covariates.push_back(s.covariates[i]);
  }
  if (out.quantities.empty())
    throw std::runtime_error("normalize_sample: all observations zero");
  out.zero_share = static_cast<double>(zeros) / static_cast<double>(n);

  const double qmin =
      *std::min_element(out.quantities.begin(), out.quantities.end());
  const double qmax =
      *std::max_element(out.quantities.begin(), out.quantities.end());
  if (!(qmax > qmin))
    throw std::runtime_error("normalize_sample: no quantity variation");
  if (qmin > 0.0) {
    for (auto& q : out.quantities) q -= qmin;
    out.shift = qmin;
  }
  out.normalized = true;
  return out;
}

namespace {

double parse_num(const std::string& key, const std::string& value) {
  double v;
  if (!parse_double(value, v))
    throw std::runtime_error("config: bad numeric value for " + key + ": '" +
                             value + "'");
  return v;
}

std::vector<double> parse_num_list(const std::string& key,
                                   const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) out.push_back(parse_num(key, item));
  if (out.empty())
    throw std::runtime_error("config: empty list for " + key);
  return out;
}

}  // namespace

void apply_config_entry(EstimationConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "grid_points")
    cfg.grid_points = static_cast<int>(parse_num(key, value));
  else if (key == "alpha_lo")
    cfg.alpha_lo = parse_num(key, value);
  else if (key == "alpha_hi")
    cfg.alpha_hi = parse_num(key, value);
  else if (key == "beta_var_tol")
    cfg.beta_var_tol = parse_num(key, value);
  else if (key == "iter_cap_factor")
    cfg.iter_cap_factor = parse_num(key, value);
  else if (key == "bandwidth") {
    if (value == "cross_validation") {
      cfg.bandwidth.method = BandwidthChoice::cross_validation;
    } else {
      cfg.bandwidth.method = BandwidthChoice::fixed;
      cfg.bandwidth.value = parse_num(key, value);
    }
  } else if (key == "bootstrap_reps")
    cfg.bootstrap_reps = static_cast<int>(parse_num(key, value));
  else if (key == "quadrature_points")
    cfg.quadrature_points = static_cast<int>(parse_num(key, value));
  else if (key == "seed")
    cfg.seed = static_cast<std::uint64_t>(parse_num(key, value));
  else if (key == "isotonize_lambda")
    cfg.isotonize_lambda = value == "1" || value == "true";
  else if (key == "theta1")
    cfg.theta1 = parse_num_list(key, value);
  else if (key == "theta2")
    cfg.theta2 = parse_num_list(key, value);
  else
    throw std::runtime_error("config: unknown key '" + key + "'");
}

EstimationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  EstimationConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key=value, got '" + line +
                               "'");
    auto trim = [](std::string v) {
      const auto bb = v.find_first_not_of(" \t");
      if (bb == std::string::npos) return std::string();
      const auto ee = v.find_last_not_of(" \t");
      return v.substr(bb, ee - bb + 1);
    };
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

}  // namespace iterfunc
