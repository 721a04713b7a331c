#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lkstopo/grid.hpp"

namespace lkstopo {

/// Locale-independent shortest round-trip formatting.
std::string format_number(double v);
/// Locale-independent formatting with `digits` significant digits.
std::string format_number(double v, int digits);

/// A named point field. Vectors are component-major with `components`
/// blocks of grid size.
struct VtkField {
  std::string name;
  int components = 1;
  std::span<const double> data;
};

/// Legacy ASCII STRUCTURED_POINTS text; 2D vectors are padded with z = 0.
std::string vtk_string(const UniformGrid& grid, std::span<const VtkField> fields,
                       const std::string& title = "lkstopo");
void write_vtk(const std::filesystem::path& path, const UniformGrid& grid,
               std::span<const VtkField> fields, const std::string& title = "lkstopo");

struct VtkData {
  UniformGrid grid;
  std::map<std::string, std::vector<double>> scalars;
  std::map<std::string, std::vector<double>> vectors;  // 3 component-major blocks
};

/// Reads the subset of the legacy format that write_vtk produces. A grid with
/// a single z layer is reported as 2D.
VtkData read_vtk(const std::filesystem::path& path);
VtkData parse_vtk(const std::string& text);

/// Append-only CSV table with a fixed header.
class CsvWriter {
 public:
  CsvWriter() = default;
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  bool is_open() const { return out_.is_open(); }
  void row(std::span<const std::string> cells);

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
};

/// Writes a whole file, throwing with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lkstopo
