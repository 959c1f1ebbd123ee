#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eulerlab/grid_field.hpp"
#include "eulerlab/grid_solver.hpp"

namespace eulerlab {

/// Shortest decimal form that still has 17 significant digits ("%.17g").
std::string format_double(double v);

/// Writes `contents` to `<path>.tmp` and renames it over `path`, so readers
/// never see a partial file. Creates parent directories. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Rectangular numeric table with a header row.
struct TimeSeries {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

/// CSV, header first, every value via format_double. Non-finite values or
/// ragged rows are refused with IoError before anything is written.
void write_timeseries(const TimeSeries& series, const std::filesystem::path& path);
TimeSeries read_timeseries(const std::filesystem::path& path);

struct SnapshotMeta {
  int n = 0;
  double t = 0.0;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::string constraint = "none";

  friend bool operator==(const SnapshotMeta&, const SnapshotMeta&) = default;
};

/// `<base>.bin`: n*n little-endian float64, row-major. `<base>.json`: metadata.
void write_snapshot(const GridField& field, const SnapshotMeta& meta, const std::filesystem::path& base);

struct Snapshot {
  GridField field;
  SnapshotMeta meta;
};
Snapshot read_snapshot(const std::filesystem::path& base);

/// step, t, total_energy, enstrophy, shell_0 ... shell_m, lowest_shell_fraction.
TimeSeries spectrum_series(const std::vector<GridSnapshot>& snapshots);

}  // namespace eulerlab
