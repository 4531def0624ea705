#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kramers/types.hpp"

namespace kramers::io {

using Json = nlohmann::ordered_json;

struct Column {
  std::string name;
  std::vector<Real> values;
};

/// Whitespace-separated table. Header lines start with '#': the title, then
/// free comments, then the column names. Values use 17 significant digits so
/// reruns are byte-identical.
void write_table(const std::string& path, const std::string& title, const std::vector<std::string>& comments,
                 const std::vector<Column>& columns);

/// Numeric rows of a table file; '#' lines and blanks are skipped.
std::vector<std::vector<Real>> read_rows(const std::string& path);

/// Column `index` of a table file, with a clear error for short rows.
std::vector<Real> read_column(const std::string& path, std::size_t index = 0);

/// 64-bit FNV-1a over the file bytes, as 16 hex digits.
std::string file_checksum(const std::string& path);

/// Run manifest: experiment name, config snapshot, seed, versions, derived
/// quantities and checksummed outputs. Only `created` varies between reruns.
class Manifest {
 public:
  Manifest(std::string experiment, std::uint64_t seed);

  Json& config() { return data_["config"]; }
  Json& derived() { return data_["derived"]; }
  Json& data() { return data_; }
  void add_output(const std::string& path, const std::string& label);
  void write(const std::string& path) const;

 private:
  Json data_;
};

inline constexpr const char* kVersion = "1.0.0";

}  // namespace kramers::io
