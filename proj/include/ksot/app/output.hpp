#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ksot::app {

inline constexpr int kSchemaVersion = 1;

/// %.17g; non-finite values print as nan, inf, -inf.
std::string format_double(double v);

/// Flat CSV with a header row. Doubles use format_double.
class CsvWriter {
 public:
  using Field = std::variant<long long, double, std::string>;

  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<Field>& fields);
  std::size_t rows() const { return rows_; }
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::ofstream out_;
  std::vector<std::string> header_;
  std::size_t rows_ = 0;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Output directory <out>/<experiment>-<run id> plus the list of files
/// written, for the manifest.
class RunDirectory {
 public:
  RunDirectory(const std::filesystem::path& root, const std::string& experiment, const std::string& id);

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

  void record_csv(const std::string& name, const CsvWriter& w);
  void record_json(const std::string& name);

  /// manifest.json: schema_version, run_id, experiment, status, files, config.
  void write_manifest(const std::string& status, const nlohmann::json& config) const;

 private:
  std::filesystem::path path_;
  std::string experiment_;
  std::string id_;
  nlohmann::json files_ = nlohmann::json::array();
};

/// Machine-readable error record for stderr.
nlohmann::json error_record(const std::string& kind, const std::string& message);

}  // namespace ksot::app
