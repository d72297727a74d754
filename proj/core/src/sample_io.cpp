#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgeboot/bootstrap.hpp"

namespace edgeboot {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("sample CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

SampleSet read_sample_csv(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::size_t d = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto head = split_csv(line);
    if (head.size() < 2 || head[0] != "sample_id")
      throw std::runtime_error("sample CSV line " + std::to_string(lineno) + ": expected header sample_id,x1,...");
    for (std::size_t i = 1; i < head.size(); ++i)
      if (head[i] != "x" + std::to_string(i))
        throw std::runtime_error("sample CSV line " + std::to_string(lineno) + ": unexpected column '" + head[i] + "'");
    d = head.size() - 1;
    break;
  }
  if (d == 0) throw std::runtime_error("sample CSV: missing header");
  std::map<long, std::vector<std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != d + 1)
      throw std::runtime_error("sample CSV line " + std::to_string(lineno) + ": expected " + std::to_string(d + 1) +
                               " columns");
    long id = 0;
    const auto res = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
    if (res.ec != std::errc() || res.ptr != cells[0].data() + cells[0].size())
      throw std::runtime_error("sample CSV line " + std::to_string(lineno) + ": bad sample_id");
    std::vector<double> x;
    for (std::size_t i = 1; i <= d; ++i) x.push_back(parse_double(cells[i], lineno));
    rows[id].push_back(std::move(x));
  }
  std::vector<Eigen::MatrixXd> samples;
  for (const auto& [id, obs] : rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(obs.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < obs.size(); ++i)
      for (std::size_t c = 0; c < d; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = obs[i][c];
    samples.push_back(std::move(m));
  }
  return SampleSet(std::move(samples), "external");
}

SampleSet read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file " + path);
  return read_sample_csv(in);
}

void write_sample_csv(std::ostream& out, const SampleSet& sset) {
  out << "sample_id";
  for (int i = 1; i <= sset.d(); ++i) out << ",x" << i;
  out << '\n';
  out << std::setprecision(17);
  for (int j = 0; j < sset.k(); ++j) {
    const auto& s = sset.sample(j);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      out << j;
      for (Eigen::Index c = 0; c < s.cols(); ++c) out << ',' << s(i, c);
      out << '\n';
    }
  }
}

void write_sample_csv(const std::string& path, const SampleSet& sset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sample file " + path);
  write_sample_csv(out, sset);
}

}  // namespace edgeboot
