#include "ksot/app/output.hpp"

#include <cmath>
#include <cstdio>

#include "ksot/app/config.hpp"

namespace ksot::app {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary | std::ios::trunc), header_(std::move(header)) {
  if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header_.size(); ++i) out_ << (i ? "," : "") << header_[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Field>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            out_ << format_double(v);
          } else {
            out_ << v;
          }
        },
        fields[i]);
  }
  out_ << '\n';
  out_.flush();
  ++rows_;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

RunDirectory::RunDirectory(const std::filesystem::path& root, const std::string& experiment,
                           const std::string& id)
    : path_(root / (experiment + "-" + id)), experiment_(experiment), id_(id) {
  std::error_code ec;
  std::filesystem::create_directories(path_, ec);
  if (ec) throw ConfigError("cannot create '" + path_.string() + "': " + ec.message());
}

void RunDirectory::record_csv(const std::string& name, const CsvWriter& w) {
  files_.push_back({{"name", name}, {"format", "csv"}, {"columns", w.header()}, {"rows", w.rows()}});
}

void RunDirectory::record_json(const std::string& name) {
  files_.push_back({{"name", name}, {"format", "json"}});
}

void RunDirectory::write_manifest(const std::string& status, const nlohmann::json& config) const {
  nlohmann::json m;
  m["schema_version"] = kSchemaVersion;
  m["run_id"] = id_;
  m["experiment"] = experiment_;
  m["status"] = status;
  m["files"] = files_;
  m["config"] = config;
  write_json(path_ / "manifest.json", m);
}

nlohmann::json error_record(const std::string& kind, const std::string& message) {
  return {{"schema_version", kSchemaVersion}, {"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace ksot::app
