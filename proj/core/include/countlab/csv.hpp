#pragma once

#include <string>
#include <vector>

namespace countlab {

// Shortest decimal representation that parses back to the same double.
// Keeps every exported CSV byte-stable across reruns.
std::string fmt_double(double x);

// Minimal RFC-4180 writer: comma separated, LF line endings, '.' decimal
// separator, fields quoted only when needed.
class CsvWriter {
 public:
  explicit CsvWriter(std::string path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& fields);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  void* out_;  // FILE*
};

std::string csv_escape(const std::string& field);

}  // namespace countlab
