#ifndef HYDROSDDP_CSV_HPP
#define HYDROSDDP_CSV_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydrosddp {

/// Parse or validation problem in an input file, with its location.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& file, int line, const std::string& reason);
  explicit InputError(const std::string& reason) : std::runtime_error(reason) {}
};

class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(const std::string& text, const std::string& source);

  const std::vector<std::string>& header() const { return header_; }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const std::string& source() const { return source_; }

  bool has_column(const std::string& name) const { return column(name) >= 0; }
  /// -1 when absent.
  int column(const std::string& name) const;
  int require_column(const std::string& name) const;

  const std::string& cell(int row, int col) const { return rows_.at(row).at(col); }
  std::string text(int row, const std::string& name) const;
  double number(int row, int col) const;
  double number(int row, const std::string& name) const;
  /// Empty cell or missing column gives `fallback`.
  double number_or(int row, const std::string& name, double fallback) const;
  int integer(int row, const std::string& name) const;
  /// Source line of a data row, for error messages.
  int line(int row) const { return lines_.at(row); }

  [[noreturn]] void fail(int row, const std::string& reason) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<int> lines_;
};

/// Formats with 9 significant digits.
std::string format_number(double value);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(const std::vector<std::string>& cells);
  std::string str() const { return out_; }
  std::size_t width() const { return width_; }

 private:
  std::string out_;
  std::size_t width_;
};

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace hydrosddp

#endif  // HYDROSDDP_CSV_HPP
