#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcrsim/readout.hpp"

namespace qcrsim {

// CSV with a fixed header. Numbers are written in shortest round-trip form so
// identical inputs give identical bytes.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& add(double value);
  CsvWriter& add(int value);
  CsvWriter& add(const std::string& value);
  CsvWriter& add(const std::optional<double>& value);  // empty field when unset
  void end_row();

  std::string str() const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> current_;
};

// Numeric CSV indexed by column name. Empty fields read as NaN. Text fields
// also read as NaN; asking for the values of a text column throws.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> column_errors;  // first parse error per column, empty if numeric

  std::optional<int> column(const std::string& name) const;
  // Throws ValidationError naming the column when absent, ParseError when
  // it holds text.
  std::vector<double> values(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text, const std::string& source = "<csv>");
CsvTable load_csv(const std::string& path);

// Shot files: `i,q,label`, label optional on read.
void save_shots(const std::string& path, const std::vector<IQShot>& shots);
std::vector<IQShot> load_shots(const std::string& path);

// GMM model as exact key-value text.
std::string format_gmm(const GmmModel& model);
GmmModel parse_gmm(const std::string& text, const std::string& source = "<model>");

void write_file(const std::string& path, const std::string& content);

}  // namespace qcrsim
