#include "eulerlab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "eulerlab/errors.hpp"

namespace eulerlab {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void TimeSeries::add_row(std::vector<double> row) { rows.push_back(std::move(row)); }

void write_timeseries(const TimeSeries& series, const fs::path& path) {
  std::string text;
  for (std::size_t c = 0; c < series.columns.size(); ++c) {
    if (c) text += ',';
    text += series.columns[c];
  }
  text += '\n';
  for (std::size_t r = 0; r < series.rows.size(); ++r) {
    const auto& row = series.rows[r];
    if (row.size() != series.columns.size()) {
      throw IoError(path.string() + ": row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                    " values for " + std::to_string(series.columns.size()) + " columns");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!std::isfinite(row[c])) {
        throw IoError(path.string() + ": non-finite value in row " + std::to_string(r) + ", column " +
                      series.columns[c]);
      }
      if (c) text += ',';
      text += format_double(row[c]);
    }
    text += '\n';
  }
  write_file_atomic(path, text);
}

TimeSeries read_timeseries(const fs::path& path) {
  std::istringstream in(read_file(path));
  TimeSeries ts;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) ts.columns.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      double x = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (ec != std::errc() || end != cell.data() + cell.size()) {
        throw IoError(path.string() + ": bad number '" + cell + "'");
      }
      row.push_back(x);
    }
    if (row.size() != ts.columns.size()) throw IoError(path.string() + ": ragged row");
    ts.rows.push_back(std::move(row));
  }
  return ts;
}

namespace {

fs::path with_suffix(const fs::path& base, const char* suffix) {
  fs::path p = base;
  p += suffix;
  return p;
}

}  // namespace

void write_snapshot(const GridField& field, const SnapshotMeta& meta, const fs::path& base) {
  if (meta.n != field.n()) throw IoError("write_snapshot: metadata n does not match the field");
  if (!field.all_finite()) throw IoError("write_snapshot: field has non-finite values");
  std::string bytes(field.size() * sizeof(double), '\0');
  auto v = field.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    auto bits = std::bit_cast<std::uint64_t>(v[k]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(bytes.data() + k * sizeof(double), &bits, sizeof bits);
  }
  nlohmann::ordered_json j;
  j["n"] = meta.n;
  j["t"] = meta.t;
  j["step"] = meta.step;
  j["seed"] = meta.seed;
  j["epsilon"] = meta.epsilon;
  j["constraint"] = meta.constraint;
  j["dtype"] = "float64-le";
  write_file_atomic(with_suffix(base, ".bin"), bytes);
  write_file_atomic(with_suffix(base, ".json"), j.dump(2) + "\n");
}

Snapshot read_snapshot(const fs::path& base) {
  Snapshot s;
  try {
    const auto j = nlohmann::json::parse(read_file(with_suffix(base, ".json")));
    s.meta.n = j.at("n").get<int>();
    s.meta.t = j.at("t").get<double>();
    s.meta.step = j.at("step").get<std::uint64_t>();
    s.meta.seed = j.at("seed").get<std::uint64_t>();
    s.meta.epsilon = j.at("epsilon").get<double>();
    s.meta.constraint = j.at("constraint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(base.string() + ".json: " + e.what());
  }
  const std::string bytes = read_file(with_suffix(base, ".bin"));
  const std::size_t cells = static_cast<std::size_t>(s.meta.n) * s.meta.n;
  if (s.meta.n < 1 || bytes.size() != cells * sizeof(double)) {
    throw IoError(base.string() + ".bin: expected " + std::to_string(cells * sizeof(double)) + " bytes");
  }
  std::vector<double> values(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + k * sizeof(double), sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    values[k] = std::bit_cast<double>(bits);
  }
  s.field = GridField(s.meta.n, std::move(values));
  return s;
}

TimeSeries spectrum_series(const std::vector<GridSnapshot>& snapshots) {
  TimeSeries ts;
  ts.columns = {"step", "t", "total_energy", "enstrophy"};
  const std::size_t shells = snapshots.empty() ? 0 : snapshots.front().spectrum.shell_energy.size();
  for (std::size_t s = 0; s < shells; ++s) ts.columns.push_back("shell_" + std::to_string(s));
  ts.columns.push_back("lowest_shell_fraction");
  for (const auto& snap : snapshots) {
    std::vector<double> row{double(snap.step), snap.t, snap.spectrum.total_energy, snap.enstrophy};
    row.insert(row.end(), snap.spectrum.shell_energy.begin(), snap.spectrum.shell_energy.end());
    row.push_back(snap.spectrum.lowest_shell_fraction);
    ts.add_row(std::move(row));
  }
  return ts;
}

}  // namespace eulerlab
