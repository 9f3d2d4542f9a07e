#ifndef ASYNCNET_CSV_HPP
#define ASYNCNET_CSV_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace asyncnet {

// Shortest decimal form that round-trips a double exactly (17 significant
// digits), so emitted CSVs re-read to bit-identical values.
std::string format_double(double value);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void begin_row();
  void add(double value);
  void add(long long value);
  void add(std::size_t value);
  void add(const std::string& value);
  void end_row();

 private:
  struct Impl;
  Impl* impl_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  double number(std::size_t row, const std::string& column) const;
  std::size_t column_index(const std::string& column) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace asyncnet

#endif  // ASYNCNET_CSV_HPP
