#include "hydrosddp/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace hydrosddp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

InputError::InputError(const std::string& file, int line, const std::string& reason)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + reason) {}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

CsvTable CsvTable::parse(const std::string& text, const std::string& source) {
  CsvTable t;
  t.source_ = source;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::vector<std::string> cells = split(stripped);
    if (t.header_.empty()) {
      t.header_ = std::move(cells);
      continue;
    }
    if (cells.size() != t.header_.size()) {
      throw InputError(source, number,
                       "expected " + std::to_string(t.header_.size()) + " fields, found " + std::to_string(cells.size()));
    }
    t.rows_.push_back(std::move(cells));
    t.lines_.push_back(number);
  }
  if (t.header_.empty()) throw InputError(source, number, "missing header row");
  return t;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header_.size(); ++k) {
    if (header_[k] == name) return static_cast<int>(k);
  }
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw InputError(source_, 1, "missing column '" + name + "'");
  return c;
}

std::string CsvTable::text(int row, const std::string& name) const { return cell(row, require_column(name)); }

double CsvTable::number(int row, int col) const {
  const std::string& s = cell(row, col);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    if (s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
    fail(row, "column '" + header_[col] + "': '" + s + "' is not a number");
  }
  return v;
}

double CsvTable::number(int row, const std::string& name) const { return number(row, require_column(name)); }

double CsvTable::number_or(int row, const std::string& name, double fallback) const {
  const int c = column(name);
  if (c < 0 || cell(row, c).empty()) return fallback;
  return number(row, c);
}

int CsvTable::integer(int row, const std::string& name) const {
  const double v = number(row, name);
  if (v != static_cast<double>(static_cast<long>(v))) fail(row, "column '" + name + "' must be an integer");
  return static_cast<int>(v);
}

void CsvTable::fail(int row, const std::string& reason) const { throw InputError(source_, line(row), reason); }

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value == 0.0 ? 0.0 : value);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width does not match the header");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out_ += ',';
    out_ += cells[k];
  }
  out_ += '\n';
  return *this;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(tmp.string(), 0, "cannot open for writing");
    out << contents;
    if (!out.flush()) throw InputError(tmp.string(), 0, "write failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace hydrosddp
