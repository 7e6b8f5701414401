#include "qmalab/field_io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace qmalab::geometry {

namespace {

constexpr const char* kMagic = "QMALAB-FIELD 1";
constexpr const char* kOrder = "row-major-lexicographic";

void write_grid_header(std::ostream& out, const GridHandle& grid) {
  out.precision(17);
  if (const auto* t = std::get_if<std::shared_ptr<const TorusGrid>>(&grid)) {
    out << "kind torus\n";
    out << "m " << (*t)->m() << "\n";
    out << "n " << (*t)->n() << "\n";
    out << "res " << (*t)->res() << "\n";
    out << "period " << (*t)->period() << "\n";
  } else {
    const auto& b = *std::get<std::shared_ptr<const BallGrid>>(grid);
    out << "kind ball\n";
    out << "n " << b.n() << "\n";
    out << "center";
    for (double c : b.center()) out << ' ' << c;
    out << "\n";
    out << "radius " << b.radius() << "\n";
    out << "spacing " << b.spacing() << "\n";
  }
  out << "order " << kOrder << "\n";
  out << "count " << node_count(grid) << "\n";
}

void write_doubles(std::ostream& out, const double* data, std::size_t count) {
  static_assert(sizeof(double) == 8);
  // Little-endian hosts only; checked at read time through the header.
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

struct Header {
  std::map<std::string, std::string> entries;

  const std::string& get(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) throw InvalidArgument("field header: missing key '" + key + "'");
    return it->second;
  }
};

Header read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw InvalidArgument("field header: bad magic");
  Header h;
  while (std::getline(in, line)) {
    if (line == "end") return h;
    const auto space = line.find(' ');
    if (space == std::string::npos) throw InvalidArgument("field header: malformed line '" + line + "'");
    h.entries[line.substr(0, space)] = line.substr(space + 1);
  }
  throw InvalidArgument("field header: missing 'end'");
}

GridHandle grid_from_header(const Header& h) {
  if (h.get("order") != kOrder) throw InvalidArgument("field header: unsupported node order");
  if (h.get("endian") != "little") throw InvalidArgument("field header: unsupported byte order");
  const std::string& kind = h.get("kind");
  GridHandle grid;
  if (kind == "torus") {
    grid = std::make_shared<const TorusGrid>(std::stoi(h.get("m")), std::stoi(h.get("res")),
                                             std::stod(h.get("period")));
  } else if (kind == "ball") {
    std::istringstream cs(h.get("center"));
    Point center;
    double c;
    while (cs >> c) center.push_back(c);
    grid = std::make_shared<const BallGrid>(std::stoi(h.get("n")), center, std::stod(h.get("radius")),
                                            std::stod(h.get("spacing")));
  } else {
    throw InvalidArgument("field header: unknown grid kind '" + kind + "'");
  }
  if (std::stoull(h.get("count")) != node_count(grid)) throw InvalidArgument("field header: count mismatch");
  return grid;
}

void read_doubles(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) {
    throw InvalidArgument("field payload: truncated");
  }
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& field) {
  out << kMagic << "\n";
  out << "type scalar\n";
  write_grid_header(out, field.grid());
  out << "endian little\n";
  out << "end\n";
  write_doubles(out, field.values().data(), field.size());
}

void write_field(std::ostream& out, const HermitianField& field) {
  out << kMagic << "\n";
  out << "type hermitian\n";
  out << "dim " << field.dim() << "\n";
  write_grid_header(out, field.grid());
  out << "endian little\n";
  out << "end\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto m = field.at(i);
    for (int c = 0; c < field.dim(); ++c) {
      for (int r = 0; r < field.dim(); ++r) {
        const double pair[2] = {m(r, c).real(), m(r, c).imag()};
        write_doubles(out, pair, 2);
      }
    }
  }
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  write_field(out, field);
}

ScalarField read_scalar_field(std::istream& in) {
  const Header h = read_header(in);
  if (h.get("type") != "scalar") throw InvalidArgument("field header: expected scalar field");
  GridHandle grid = grid_from_header(h);
  std::vector<double> values(node_count(grid));
  read_doubles(in, values.data(), values.size());
  return ScalarField(grid, std::move(values));
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return read_scalar_field(in);
}

HermitianField read_hermitian_field(std::istream& in) {
  const Header h = read_header(in);
  if (h.get("type") != "hermitian") throw InvalidArgument("field header: expected hermitian field");
  GridHandle grid = grid_from_header(h);
  const int dim = std::stoi(h.get("dim"));
  HermitianField field(grid, dim);
  for (std::size_t i = 0; i < field.size(); ++i) {
    auto m = field.at(i);
    for (int c = 0; c < dim; ++c) {
      for (int r = 0; r < dim; ++r) {
        double pair[2];
        read_doubles(in, pair, 2);
        m(r, c) = Complex(pair[0], pair[1]);
      }
    }
  }
  return field;
}

}  // namespace qmalab::geometry
