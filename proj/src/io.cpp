#include "kramers/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "kramers/errors.hpp"

namespace kramers::io {

void write_table(const std::string& path, const std::string& title, const std::vector<std::string>& comments,
                 const std::vector<Column>& columns) {
  if (columns.empty()) fail(ErrorKind::kInvalidInput, "table without columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.values.size() != rows) fail(ErrorKind::kInvalidShape, "column '" + c.name + "' has a different length");
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + path);
  out << "# " << title << "\n";
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "#";
  for (const auto& c : columns) out << ' ' << c.name;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", columns[j].values[i]);
      out << (j ? " " : "") << buf;
    }
    out << "\n";
  }
  if (!out) fail(ErrorKind::kInvalidInput, "write failed for " + path);
}

std::vector<std::vector<Real>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::vector<std::vector<Real>> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<Real> row;
    for (std::string tok; fields >> tok;) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(path, number, "expected a number, got '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Real> read_column(const std::string& path, std::size_t index) {
  std::vector<Real> out;
  for (const auto& row : read_rows(path)) {
    if (row.size() <= index) {
      throw ParseError(path, 0, "row with " + std::to_string(row.size()) + " fields has no column " + std::to_string(index));
    }
    out.push_back(row[index]);
  }
  return out;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kInvalidInput, "cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

Manifest::Manifest(std::string experiment, std::uint64_t seed) {
  data_["experiment"] = std::move(experiment);
  data_["seed"] = seed;
  data_["versions"] = {{"kramers", kVersion}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                            std::to_string(EIGEN_MINOR_VERSION)}};
  data_["config"] = Json::object();
  data_["derived"] = Json::object();
  data_["outputs"] = Json::array();
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  data_["created"] = ts.str();
}

void Manifest::add_output(const std::string& path, const std::string& label) {
  data_["outputs"].push_back({{"file", std::filesystem::path(path).filename().string()},
                              {"content", label},
                              {"fnv1a64", file_checksum(path)}});
}

void Manifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + path);
  out << data_.dump(2) << "\n";
}

}  // namespace kramers::io
