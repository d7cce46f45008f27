#include "roughtomo/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "roughtomo/util.hpp"

namespace roughtomo {

std::string format_g17(double v) {
  char buf[40];
  // shortest decimal that round-trips to the same bits
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : path_(path), n_cols_(header.size()) {
  if (header.empty())
    throw ValidationError("csv: header must name at least one column");
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += header[i];
  }
  buf_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_cols_)
    throw ValidationError("csv: row width does not match the header");
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += format_g17(values[i]);
  }
  buf_ += '\n';
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
  if (cells.size() != n_cols_)
    throw ValidationError("csv: row width does not match the header");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    if (cells[i].find_first_of(",\n\"") != std::string::npos)
      throw ValidationError("csv: cell contains a delimiter");
    buf_ += cells[i];
  }
  buf_ += '\n';
}

void CsvWriter::close() {
  if (!open_) return;
  open_ = false;
  std::filesystem::create_directories(path_.parent_path().empty()
                                          ? "."
                                          : path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("csv: cannot write '" + path_.string() + "'");
  out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  if (!out) throw ValidationError("csv: short write '" + path_.string() + "'");
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; an explicit close() reports the failure
  }
}

std::uint64_t file_fnv1a(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError("manifest: cannot read '" + path.string() + "'");
  char buf[1 << 16];
  std::uint64_t h = 0xcbf29ce484222325ull;
  while (in) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    if (got > 0) h = fnv1a(buf, static_cast<size_t>(got), h);
  }
  return h;
}

void Manifest::add_file(const std::filesystem::path& path) {
  std::uint64_t h = file_fnv1a(path);
  std::uintmax_t bytes = std::filesystem::file_size(path);
  char line[512];
  std::snprintf(line, sizeof line, "%016llx\t%llu\t%s",
                static_cast<unsigned long long>(h),
                static_cast<unsigned long long>(bytes),
                path.filename().string().c_str());
  lines.push_back(line);
}

void Manifest::add_note(const std::string& key, const std::string& value) {
  lines.push_back("# " + key + " = " + value);
}

void Manifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ValidationError("manifest: cannot write '" + path.string() + "'");
  for (const std::string& l : lines) out << l << '\n';
}

void write_failure(const std::filesystem::path& out_dir,
                   const std::string& stage, const std::exception& err) {
  nlohmann::json j;
  j["stage"] = stage;
  j["error"] = err.what();
  j["exit_code"] = exit_code_for(err);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream out(out_dir / "failure.json", std::ios::trunc);
  if (out) out << j.dump(2) << '\n';
}

RunLock::RunLock(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  path_ = out_dir / ".run_lock";
  if (std::filesystem::exists(path_))
    throw ValidationError(
        "output directory is locked by another run (remove '" +
        path_.string() + "' if that run is dead)");
  std::ofstream out(path_);
  if (!out)
    throw ValidationError("cannot create lock '" + path_.string() + "'");
  out << "locked\n";
  held_ = true;
}

RunLock::~RunLock() {
  if (held_) {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

}  // namespace roughtomo
