#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "nrev/pipeline.hpp"

namespace nrev {

// Filesystem-level failure (missing file, unwritable path). Distinct from
// std::invalid_argument so the CLI can map it to its own exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 1D CSV: one integer per line. 2D CSV: comma-separated integers, one row
// per line. No headers; metadata lives in JSON sidecars.
IntVec read_csv_1d(const std::filesystem::path& path);
Image2D read_csv_2d(const std::filesystem::path& path);
void write_csv_1d(const std::filesystem::path& path, std::span<const std::int64_t> values);
void write_csv_2d(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                  std::span<const std::int64_t> values);

// True when the first data line contains a comma.
bool csv_is_2d(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

struct PgmWriteStats {
  std::int64_t clamped_negatives = 0;
  bool rescaled = false;
};

// Plain (P2) PGM preview of a grid; negatives clamp to 0 and values are
// rescaled when they exceed the 16-bit PGM ceiling.
PgmWriteStats write_pgm(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                        std::span<const std::int64_t> values);

}  // namespace nrev
