#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cav/simulation.hpp"

namespace cav {

/// Malformed or invalid scenario document. `field` is a dotted path such as
/// "arrivals[2].v0"; `line`/`column` are set for syntax errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string field, std::optional<int> line = {},
             std::optional<int> column = {})
      : std::runtime_error(what), field_(std::move(field)), line_(line), column_(column) {}

  const std::string& field() const { return field_; }
  std::optional<int> line() const { return line_; }
  std::optional<int> column() const { return column_; }

 private:
  std::string field_;
  std::optional<int> line_;
  std::optional<int> column_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Every field written out; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

std::string read_file(const std::filesystem::path& path);

}  // namespace cav
