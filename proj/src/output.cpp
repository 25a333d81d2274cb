#include "fsavg/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "fsavg/error.hpp"

namespace fsavg {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void CsvTable::meta(const std::string& key, const std::string& value) {
  meta_.emplace_back(key, value);
}

void CsvTable::meta(const std::string& key, double value) { meta(key, format_double(value)); }

void CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> r;
  r.reserve(values.size());
  for (double v : values) r.push_back(format_double(v));
  row(r);
}

void CsvTable::row(const std::vector<std::string>& values) {
  if (values.size() != header_.size()) throw UsageError("CSV row width differs from the header");
  rows_.push_back(values);
}

std::string CsvTable::str() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += "# " + k + "=" + v + "\n";
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << str();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace fsavg
