#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fsavg {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// CSV table preceded by "# key=value" metadata lines.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void meta(const std::string& key, const std::string& value);
  void meta(const std::string& key, double value);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& values);

  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace fsavg
