#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "advreal/core/image.hpp"

namespace advreal::harness {

/// Exclusive ownership of an output directory through a lock file.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

inline constexpr const char* kLockName = ".advreal.lock";
inline constexpr const char* kPartialSuffix = ".partial";

/// Throws IoError when `path` exists and `overwrite` is false.
void check_target(const std::filesystem::path& path, bool overwrite);

/// Writes `path.partial` then renames it over `path`. A failed write leaves
/// only the .partial file behind.
void write_text_artifact(const std::filesystem::path& path, const std::string& content, bool overwrite);
void write_png_artifact(const std::filesystem::path& path, const Image& img, bool overwrite);

std::string read_text(const std::filesystem::path& path);

/// Minimal reader for the CSV files this tool writes (header row, no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  [[nodiscard]] int column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace advreal::harness
