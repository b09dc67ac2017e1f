#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace priorest {

/// Quotes a field when it holds a comma, quote or newline.
std::string csv_escape(const std::string& field);

/// Writes the header on open; every row must match its width.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);

private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace priorest
