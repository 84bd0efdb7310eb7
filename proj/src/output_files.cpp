#include "dissipair/output_files.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dissipair/types.hpp"

namespace dissipair {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) {
  if (header.empty()) throw Error(ErrorCode::InvalidArgument, "CSV needs at least one column");
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += '\n';
}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error(ErrorCode::DimensionMismatch, "CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += '\n';
  ++rows_;
  return *this;
}

std::string CsvTable::str() const { return text_; }

OutputSet::OutputSet(std::string directory, nlohmann::json metadata)
    : directory_(std::move(directory)), metadata_(std::move(metadata)) {}

void OutputSet::add(const std::string& name, std::string content) {
  if (files_.count(name)) throw Error(ErrorCode::InvalidArgument, "duplicate output file " + name);
  files_[name] = std::move(content);
  nlohmann::json meta = metadata_;
  meta["file"] = name;
  files_[name + ".meta.json"] = meta.dump(2) + "\n";
}

void OutputSet::add_csv(const std::string& name, const CsvTable& table) { add(name, table.str()); }

void OutputSet::add_json(const std::string& name, const nlohmann::json& value) { add(name, value.dump(2) + "\n"); }

void OutputSet::commit() const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) throw Error(ErrorCode::Numerical, "cannot create output directory " + directory_ + ": " + ec.message());
  for (const auto& [name, content] : files_) {
    const fs::path target = fs::path(directory_) / name;
    const fs::path staging = fs::path(directory_) / (name + ".tmp");
    {
      std::ofstream out(staging, std::ios::binary);
      out << content;
      if (!out) throw Error(ErrorCode::Numerical, "cannot write " + staging.string());
    }
    fs::rename(staging, target, ec);
    if (ec) throw Error(ErrorCode::Numerical, "cannot write " + target.string() + ": " + ec.message());
  }
}

}  // namespace dissipair
