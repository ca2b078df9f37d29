#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace relulab {

// Shortest round-trip decimal form via std::to_chars, so CSV bodies are
// byte-stable across runs of the same build.
std::string fmt_double(double v);

// Minimal CSV emitter: UTF-8, LF line endings, header written first.
// Values never need quoting here (no commas or newlines in any field).
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::size_t width_;
};

void ensure_dir(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace relulab
