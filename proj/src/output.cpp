#include "lkstopo/output.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace lkstopo {

namespace {

std::runtime_error io_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(what + ": " + path.string());
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string format_number(double v, int digits) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
  return std::string(buf, r.ptr);
}

std::string vtk_string(const UniformGrid& grid, std::span<const VtkField> fields,
                       const std::string& title) {
  const std::size_t n = grid.size();
  std::string s;
  s += "# vtk DataFile Version 3.0\n";
  s += title + "\n";
  s += "ASCII\n";
  s += "DATASET STRUCTURED_POINTS\n";
  s += "DIMENSIONS " + std::to_string(grid.extents[0]) + " " + std::to_string(grid.extents[1]) +
       " " + std::to_string(grid.extents[2]) + "\n";
  s += "ORIGIN " + format_number(grid.origin[0], 9) + " " + format_number(grid.origin[1], 9) +
       " " + format_number(grid.origin[2], 9) + "\n";
  const std::string dx = format_number(grid.dx, 9);
  s += "SPACING " + dx + " " + dx + " " + dx + "\n";
  s += "POINT_DATA " + std::to_string(n) + "\n";
  for (const auto& f : fields) {
    if (f.data.size() != n * static_cast<std::size_t>(f.components)) {
      throw std::invalid_argument("VTK field '" + f.name + "' does not match the grid");
    }
    if (f.components == 1) {
      s += "SCALARS " + f.name + " double 1\n";
      s += "LOOKUP_TABLE default\n";
      for (std::size_t i = 0; i < n; ++i) s += format_number(f.data[i], 9) + "\n";
    } else {
      s += "VECTORS " + f.name + " double\n";
      for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) {
          const double v = a < f.components ? f.data[a * n + i] : 0.0;
          s += format_number(v, 9);
          s += a < 2 ? " " : "\n";
        }
      }
    }
  }
  return s;
}

void write_vtk(const std::filesystem::path& path, const UniformGrid& grid,
               std::span<const VtkField> fields, const std::string& title) {
  write_text(path, vtk_string(grid, fields, title));
}

VtkData parse_vtk(const std::string& text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw std::runtime_error("not a legacy VTK file");
  std::getline(in, line);  // title
  std::getline(in, line);
  if (line.rfind("ASCII", 0) != 0) throw std::runtime_error("only ASCII VTK files are supported");
  VtkData d;
  std::size_t n = 0;
  std::string key;
  while (in >> key) {
    if (key == "DATASET") {
      in >> key;
      if (key != "STRUCTURED_POINTS") throw std::runtime_error("only STRUCTURED_POINTS is supported");
    } else if (key == "DIMENSIONS") {
      in >> d.grid.extents[0] >> d.grid.extents[1] >> d.grid.extents[2];
      d.grid.dim = d.grid.extents[2] > 1 ? 3 : 2;
    } else if (key == "ORIGIN") {
      in >> d.grid.origin[0] >> d.grid.origin[1] >> d.grid.origin[2];
    } else if (key == "SPACING") {
      double sy = 0.0, sz = 0.0;
      in >> d.grid.dx >> sy >> sz;
    } else if (key == "POINT_DATA") {
      in >> n;
    } else if (key == "SCALARS") {
      std::string name, type;
      int comps = 1;
      in >> name >> type;
      std::getline(in, line);
      std::istringstream rest(line);
      if (!(rest >> comps)) comps = 1;
      if (comps != 1) throw std::runtime_error("multi-component SCALARS not supported");
      in >> key;
      if (key != "LOOKUP_TABLE") throw std::runtime_error("expected LOOKUP_TABLE");
      in >> key;
      std::vector<double> v(n);
      for (auto& x : v) {
        if (!(in >> x)) throw std::runtime_error("truncated SCALARS block '" + name + "'");
      }
      d.scalars[name] = std::move(v);
    } else if (key == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      std::vector<double> v(3 * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) {
          if (!(in >> v[a * n + i])) throw std::runtime_error("truncated VECTORS block '" + name + "'");
        }
      }
      d.vectors[name] = std::move(v);
    } else {
      throw std::runtime_error("unsupported VTK keyword '" + key + "'");
    }
  }
  if (n != d.grid.size()) throw std::runtime_error("POINT_DATA does not match DIMENSIONS");
  return d;
}

VtkData read_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot read VTK file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_vtk(ss.str());
  } catch (const std::runtime_error& e) {
    throw io_error(path, e.what());
  }
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw io_error(path, "cannot open CSV file");
  row(header);
}

void CsvWriter::row(std::span<const std::string> cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CSV row has the wrong column count");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  out_.flush();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open file for writing");
  out << text;
  if (!out) throw io_error(path, "write failed");
}

}  // namespace lkstopo
