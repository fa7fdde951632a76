#include "motionlab/io_util.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "motionlab/errors.hpp"

namespace motionlab {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("cannot open for writing: " + path);
  file_ = f;
  row(header);
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(static_cast<std::FILE*>(file_));
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  std::FILE* f = static_cast<std::FILE*>(file_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) std::fputc(',', f);
    std::fputs(cells[i].c_str(), f);
  }
  std::fputc('\n', f);
}

std::string CsvWriter::cell(double v) { return format_double(v); }
std::string CsvWriter::cell(int v) { return std::to_string(v); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace motionlab
