#ifndef DISSIPAIR_OUTPUT_FILES_HPP
#define DISSIPAIR_OUTPUT_FILES_HPP

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace dissipair {

/// Number formatting shared by all CSV files ("%.12g", '.' decimal).
std::string format_number(double value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(const std::vector<std::string>& cells);
  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  std::string text_;
  std::size_t width_ = 0;
  std::size_t rows_ = 0;
};

/// Collects output files in memory and writes them together, so a failing
/// run leaves nothing behind. Each data file gets a <name>.meta.json sidecar.
class OutputSet {
 public:
  OutputSet(std::string directory, nlohmann::json metadata);

  void add_csv(const std::string& name, const CsvTable& table);
  void add_json(const std::string& name, const nlohmann::json& value);

  /// Creates the directory and writes every file; throws Error(Numerical)
  /// on I/O failure.
  void commit() const;

  const std::map<std::string, std::string>& files() const { return files_; }

 private:
  void add(const std::string& name, std::string content);

  std::string directory_;
  nlohmann::json metadata_;
  std::map<std::string, std::string> files_;
};

}  // namespace dissipair

#endif  // DISSIPAIR_OUTPUT_FILES_HPP
