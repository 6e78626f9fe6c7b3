#include "countlab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace countlab {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::string path) : path_(std::move(path)) {
  FILE* f = std::fopen(path_.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open for writing: " + path_);
  out_ = f;
}

CsvWriter::~CsvWriter() {
  if (out_) std::fclose(static_cast<FILE*>(out_));
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  FILE* f = static_cast<FILE*>(out_);
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) std::fputc(',', f);
    std::string esc = csv_escape(fields[i]);
    std::fwrite(esc.data(), 1, esc.size(), f);
  }
  std::fputc('\n', f);
}

}  // namespace countlab
