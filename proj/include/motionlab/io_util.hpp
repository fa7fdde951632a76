#pragma once

#include <string>
#include <vector>

namespace motionlab {

/// Shortest text that round-trips the double exactly would vary in width;
/// reports and canonical files instead pin every float to 17 significant
/// digits so identical runs produce identical bytes.
std::string format_double(double v);

/// Minimal CSV writer; all numeric cells go through format_double.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& cells);

  static std::string cell(double v);
  static std::string cell(int v);

 private:
  void* file_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace motionlab
