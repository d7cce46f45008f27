#pragma once

// Output plumbing: CSV writers with full-precision floats, run manifests
// with content checksums, failure records, and a run lock.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roughtomo/errors.hpp"

namespace roughtomo {

std::string format_g17(double v);  // shortest round-trip decimal (%.17g trimmed)

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& cells);
  void close();
  const std::filesystem::path& path() const { return path_; }
  ~CsvWriter();

 private:
  std::filesystem::path path_;
  std::string buf_;
  std::size_t n_cols_;
  bool open_ = true;
};

// Manifest: one "fnv1a<tab>bytes<tab>name" line per artifact, written last.
struct Manifest {
  std::vector<std::string> lines;
  void add_file(const std::filesystem::path& path);
  void add_note(const std::string& key, const std::string& value);
  void write(const std::filesystem::path& path) const;
};

std::uint64_t file_fnv1a(const std::filesystem::path& path);

// failure.json: machine-readable record of a failed run.
void write_failure(const std::filesystem::path& out_dir,
                   const std::string& stage, const std::exception& err);

// Advisory lock file in the output directory; throws ValidationError when a
// live lock is present, removes it on destruction.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& out_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
  bool held_ = false;
};

}  // namespace roughtomo
