#include "priorest/csv.hpp"

#include "priorest/scalar.hpp"

namespace priorest {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), out_(path, std::ios::binary), width_(header.size()) {
  if (!out_) {
    throw ValidationError("cannot write " + path.string());
  }
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) {
    throw ValidationError(path_.string() + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                          std::to_string(width_));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write " + path.string());
  }
  out << text;
}

}  // namespace priorest
