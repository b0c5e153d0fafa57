#include "clfm/harness/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef CLFM_VERSION
#define CLFM_VERSION "unknown"
#endif

namespace clfm::harness {

std::string code_version() { return CLFM_VERSION; }

Eigen::MatrixXd Dataset::observations() const {
  if (values.empty()) return Eigen::MatrixXd();
  const Eigen::Index m = coords.rows();
  Eigen::MatrixXd y(samples(), m * static_cast<Eigen::Index>(values.size()));
  for (std::size_t c = 0; c < values.size(); ++c) {
    y.middleCols(static_cast<Eigen::Index>(c) * m, m) = values[c];
  }
  return y;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& data) {
  if (data.channels.size() != data.values.size()) {
    throw std::invalid_argument("dataset: channel names and value blocks differ");
  }
  for (const auto& v : data.values) {
    if (v.cols() != data.coords.rows() || v.rows() != data.samples()) {
      throw std::invalid_argument("dataset: value block shape mismatch");
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& [k, v] : data.header) out << "# " << k << '=' << v << '\n';
  out << "sample_id";
  for (Eigen::Index k = 0; k < data.coords.cols(); ++k) out << ",x" << k;
  for (const auto& c : data.channels) out << ',' << c;
  out << '\n';
  for (Eigen::Index s = 0; s < data.samples(); ++s) {
    for (Eigen::Index p = 0; p < data.coords.rows(); ++p) {
      out << s;
      for (Eigen::Index k = 0; k < data.coords.cols(); ++k) out << ',' << fmt(data.coords(p, k));
      for (const auto& v : data.values) out << ',' << fmt(v(s, p));
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset '" + path + "'");
  Dataset d;
  std::string line;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) d.header[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    columns = split(line);
    break;
  }
  if (columns.empty() || columns[0] != "sample_id") {
    throw std::runtime_error("dataset '" + path + "': missing column line");
  }
  Eigen::Index dim = 0;
  while (dim + 1 < static_cast<Eigen::Index>(columns.size()) &&
         columns[dim + 1] == "x" + std::to_string(dim)) {
    ++dim;
  }
  for (std::size_t c = 1 + dim; c < columns.size(); ++c) d.channels.push_back(columns[c]);
  if (d.channels.empty()) throw std::runtime_error("dataset '" + path + "': no channels");

  std::vector<std::vector<double>> rows;
  std::vector<long> ids;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns.size()) {
      throw std::runtime_error("dataset '" + path + "': ragged row");
    }
    ids.push_back(std::stol(cells[0]));
    std::vector<double> r;
    for (std::size_t i = 1; i < cells.size(); ++i) r.push_back(std::stod(cells[i]));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error("dataset '" + path + "': no rows");
  Eigen::Index m = 0;
  while (m < static_cast<Eigen::Index>(ids.size()) && ids[m] == ids[0]) ++m;
  if (rows.size() % m != 0) throw std::runtime_error("dataset '" + path + "': uneven samples");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size()) / m;
  d.coords.resize(m, dim);
  for (Eigen::Index p = 0; p < m; ++p) {
    for (Eigen::Index k = 0; k < dim; ++k) d.coords(p, k) = rows[p][k];
  }
  d.values.assign(d.channels.size(), Eigen::MatrixXd(n, m));
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index p = 0; p < m; ++p) {
      const auto& r = rows[s * m + p];
      if (ids[s * m + p] != ids[s * m]) {
        throw std::runtime_error("dataset '" + path + "': sample rows are not contiguous");
      }
      for (Eigen::Index k = 0; k < dim; ++k) {
        if (r[k] != d.coords(p, k)) {
          throw std::runtime_error("dataset '" + path + "': coordinates differ between samples");
        }
      }
      for (std::size_t c = 0; c < d.channels.size(); ++c) d.values[c](s, p) = r[dim + c];
    }
  }
  return d;
}

}  // namespace clfm::harness
