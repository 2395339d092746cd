#include "qcrsim/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qcrsim/keyvalue.hpp"
#include "qcrsim/units.hpp"

namespace qcrsim {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

CsvWriter& CsvWriter::add(double value) {
  current_.push_back(format_exact(value));
  return *this;
}

CsvWriter& CsvWriter::add(int value) {
  current_.push_back(std::to_string(value));
  return *this;
}

CsvWriter& CsvWriter::add(const std::string& value) {
  current_.push_back(value);
  return *this;
}

CsvWriter& CsvWriter::add(const std::optional<double>& value) {
  current_.push_back(value ? format_exact(*value) : std::string());
  return *this;
}

void CsvWriter::end_row() {
  if (current_.size() != header_.size()) {
    throw std::logic_error("csv row has " + std::to_string(current_.size()) + " fields, header has " +
                           std::to_string(header_.size()));
  }
  rows_.push_back(std::move(current_));
  current_.clear();
}

std::string CsvWriter::str() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << "\n";
  };
  line(header_);
  for (const auto& row : rows_) line(row);
  return out.str();
}

void CsvWriter::save(const std::string& path) const { write_file(path, str()); }

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::optional<int> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const auto c = column(name);
  if (!c) throw ValidationError(name, "missing CSV column");
  if (!column_errors[*c].empty()) throw std::runtime_error(column_errors[*c]);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[*c]);
  return out;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (table.header.empty()) {
      table.header = std::move(fields);
      table.column_errors.assign(table.header.size(), "");
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(table.header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double value = std::nan("");
      if (!fields[c].empty()) {
        try {
          value = parse_double(fields[c]);
        } catch (const std::invalid_argument& e) {
          if (table.column_errors[c].empty()) {
            table.column_errors[c] = ParseError(source, line_no, table.header[c] + ": " + e.what()).what();
          }
        }
      }
      row.push_back(value);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError(source, line_no, "missing header");
  return table;
}

CsvTable load_csv(const std::string& path) { return parse_csv(read_file(path), path); }

void save_shots(const std::string& path, const std::vector<IQShot>& shots) {
  CsvWriter csv({"i", "q", "label"});
  for (const auto& s : shots) csv.add(s.i).add(s.q).add(s.label).end_row();
  csv.save(path);
}

std::vector<IQShot> load_shots(const std::string& path) {
  const CsvTable table = load_csv(path);
  const auto i = table.values("i");
  const auto q = table.values("q");
  const auto labels = table.column("label") ? table.values("label") : std::vector<double>(i.size(), -1.0);
  std::vector<IQShot> shots(i.size());
  for (std::size_t k = 0; k < i.size(); ++k) {
    shots[k].i = i[k];
    shots[k].q = q[k];
    shots[k].label = std::isfinite(labels[k]) ? static_cast<int>(labels[k]) : -1;
  }
  return shots;
}

std::string format_gmm(const GmmModel& model) {
  std::ostringstream out;
  out << "components = " << model.size() << "\n";
  out << "log_likelihood = " << format_exact(model.log_likelihood) << "\n";
  out << "iterations = " << model.iterations << "\n";
  out << "converged = " << (model.converged ? "true" : "false") << "\n";
  for (int k = 0; k < model.size(); ++k) {
    const auto& c = model.components[k];
    out << "\n[component." << k << "]\n";
    out << "label = " << (k < static_cast<int>(model.labels.size()) ? model.labels[k] : k) << "\n";
    out << "weight = " << format_exact(model.weights[k]) << "\n";
    out << "mean = " << format_exact(c.mean(0)) << ", " << format_exact(c.mean(1)) << "\n";
    out << "covariance = " << format_exact(c.covariance(0, 0)) << ", " << format_exact(c.covariance(0, 1))
        << ", " << format_exact(c.covariance(1, 1)) << "\n";
  }
  return out.str();
}

GmmModel parse_gmm(const std::string& text, const std::string& source) {
  std::map<std::string, KeyValue> kv;
  for (auto& entry : parse_key_values(text, source)) kv[entry.key] = entry;
  auto get = [&](const std::string& key) -> const KeyValue& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(key, source + ": missing key");
    return it->second;
  };
  auto wrap = [&](const KeyValue& entry, auto parse) {
    try {
      return parse(entry.value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, entry.line, entry.key + ": " + e.what());
    }
  };
  GmmModel model;
  const int k = static_cast<int>(wrap(get("components"), parse_integer));
  if (k < 1) throw ValidationError("components", "must be >= 1");
  model.log_likelihood = wrap(get("log_likelihood"), parse_double);
  model.iterations = static_cast<int>(wrap(get("iterations"), parse_integer));
  model.converged = wrap(get("converged"), parse_bool);
  for (int c = 0; c < k; ++c) {
    const std::string prefix = "component." + std::to_string(c) + ".";
    Gaussian2 g;
    const auto mean = wrap(get(prefix + "mean"), parse_double_list);
    const auto cov = wrap(get(prefix + "covariance"), parse_double_list);
    if (mean.size() != 2) throw ValidationError(prefix + "mean", "expected 2 values");
    if (cov.size() != 3) throw ValidationError(prefix + "covariance", "expected 3 values (xx, xy, yy)");
    g.mean << mean[0], mean[1];
    g.covariance << cov[0], cov[1], cov[1], cov[2];
    model.components.push_back(g);
    model.weights.push_back(wrap(get(prefix + "weight"), parse_double));
    model.labels.push_back(static_cast<int>(wrap(get(prefix + "label"), parse_integer)));
  }
  return model;
}

}  // namespace qcrsim
