#include "nrev/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nrev {

namespace {

std::int64_t parse_count(const std::string& token, const std::filesystem::path& path) {
  try {
    std::size_t consumed = 0;
    const std::int64_t value = std::stoll(token, &consumed);
    if (consumed != token.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer '" + token + "' in " + path.string());
  }
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

IntVec read_csv_1d(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  IntVec values;
  std::string line;
  while (std::getline(in, line)) {
    const std::string token = strip(line);
    if (token.empty()) continue;
    values.push_back(parse_count(token, path));
  }
  if (values.empty()) throw std::invalid_argument("no data in " + path.string());
  return values;
}

Image2D read_csv_2d(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Image2D image;
  std::string line;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(row, cell, ',')) {
      image.counts.push_back(parse_count(strip(cell), path));
      ++cols;
    }
    if (image.rows == 0) {
      image.cols = cols;
    } else if (cols != image.cols) {
      throw std::invalid_argument("ragged rows in " + path.string());
    }
    ++image.rows;
  }
  if (image.counts.empty()) throw std::invalid_argument("no data in " + path.string());
  return image;
}

void write_csv_1d(const std::filesystem::path& path, std::span<const std::int64_t> values) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::int64_t v : values) out << v << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_csv_2d(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                  std::span<const std::int64_t> values) {
  if (values.size() != rows * cols)
    throw std::invalid_argument("write_csv_2d: size does not match dimensions");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << values[r * cols + c];
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

bool csv_is_2d(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    const std::string data = strip(line);
    if (data.empty()) continue;
    return data.find(',') != std::string::npos;
  }
  throw std::invalid_argument("no data in " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PgmWriteStats write_pgm(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                        std::span<const std::int64_t> values) {
  if (values.size() != rows * cols)
    throw std::invalid_argument("write_pgm: size does not match dimensions");
  PgmWriteStats stats;
  std::int64_t max_value = 0;
  for (std::int64_t v : values) {
    if (v < 0) ++stats.clamped_negatives;
    max_value = std::max(max_value, v);
  }
  constexpr std::int64_t kPgmCeiling = 65535;
  const double scale =
      max_value > kPgmCeiling ? static_cast<double>(kPgmCeiling) / static_cast<double>(max_value)
                              : 1.0;
  stats.rescaled = scale != 1.0;
  const std::int64_t maxval = std::max<std::int64_t>(
      1, std::min(max_value > kPgmCeiling ? kPgmCeiling : max_value, kPgmCeiling));

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P2\n" << cols << ' ' << rows << '\n' << maxval << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ' ';
      const std::int64_t clamped = std::max<std::int64_t>(0, values[r * cols + c]);
      out << static_cast<std::int64_t>(std::llround(static_cast<double>(clamped) * scale));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
  return stats;
}

}  // namespace nrev
