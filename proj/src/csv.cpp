#include "asyncnet/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace asyncnet {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
  bool row_open = false;
  bool first_field = true;
};

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary);  // no platform newline translation
  if (!impl_->out)
    throw std::runtime_error("cannot open CSV for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << header[i];
  }
  impl_->out << '\n';
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::begin_row() {
  impl_->row_open = true;
  impl_->first_field = true;
}

void CsvWriter::add(double value) { add(format_double(value)); }

void CsvWriter::add(long long value) { add(std::to_string(value)); }

void CsvWriter::add(std::size_t value) { add(std::to_string(value)); }

void CsvWriter::add(const std::string& value) {
  if (!impl_->row_open) throw std::logic_error("CSV field outside a row");
  if (!impl_->first_field) impl_->out << ',';
  impl_->out << value;
  impl_->first_field = false;
}

void CsvWriter::end_row() {
  impl_->out << '\n';
  impl_->row_open = false;
}

std::size_t CsvTable::column_index(const std::string& column) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) return i;
  throw std::out_of_range("no CSV column named " + column);
}

double CsvTable::number(std::size_t row, const std::string& column) const {
  return std::stod(rows.at(row).at(column_index(column)));
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open CSV for reading: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

}  // namespace asyncnet
