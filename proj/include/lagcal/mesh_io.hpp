#pragma once
// Plain-text mesh serialization and CSV export of nodal fields.
//
//   lagmesh 1
//   model <catalog name>
//   domain torus <n> <N>
//   domain box <n> <intervals> <fd_order> <collar> <lo_1> <hi_1> ... <lo_n> <hi_n>
//   orientation <±1>
//   wraps <n>            (torus only; n lines of D values)
//   positions <nodes> <D>
//   <nodes lines of D values>
//   reference <nodes> <D> (box only)
//   <nodes lines of D values>
//
// Numbers are written with %.17g so a round trip is exact.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lagcal/catalog.hpp"
#include "lagcal/lag_mesh.hpp"

namespace lagcal {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_mesh(std::ostream& os, const LagMesh& mesh) {
  const Grid& g = mesh.grid();
  const int D = mesh.D();
  os << "lagmesh 1\n";
  os << "model " << mesh.model().name << "\n";
  if (g.is_torus()) {
    os << "domain torus " << g.n() << ' ' << g.count(0) << "\n";
  } else {
    os << "domain box " << g.n() << ' ' << g.resolution() << ' ' << g.fd_order() << ' '
       << format_double(g.collar_fraction());
    for (int a = 0; a < g.n(); ++a) os << ' ' << format_double(g.lo(a)) << ' ' << format_double(g.hi(a));
    os << "\n";
  }
  os << "orientation " << mesh.orientation() << "\n";
  auto rows = [&](const std::vector<double>& v) {
    for (std::size_t k = 0; k < mesh.nodes(); ++k) {
      for (int c = 0; c < D; ++c) os << (c ? " " : "") << format_double(v[k * D + c]);
      os << "\n";
    }
  };
  if (g.is_torus()) {
    os << "wraps " << g.n() << "\n";
    for (const auto& w : mesh.wraps()) {
      for (int c = 0; c < D; ++c) os << (c ? " " : "") << format_double(w[c]);
      os << "\n";
    }
  }
  os << "positions " << mesh.nodes() << ' ' << D << "\n";
  rows(mesh.positions());
  if (!g.is_torus()) {
    os << "reference " << mesh.nodes() << ' ' << D << "\n";
    rows(mesh.reference());
  }
}

inline LagMesh read_mesh(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw MeshError("mesh file: expected '" + word + "'");
  };
  auto read_rows = [&](std::size_t count, int D) {
    std::vector<double> v(count * D);
    for (auto& x : v)
      if (!(is >> x)) throw MeshError("mesh file: truncated numeric block");
    return v;
  };
  expect("lagmesh");
  int version = 0;
  is >> version;
  if (version != 1) throw MeshError("mesh file: unsupported version");
  expect("model");
  std::string model_name;
  is >> model_name;
  auto model = std::make_shared<const AmbientModel>(catalog_model(model_name));
  expect("domain");
  std::string kind;
  int n = 0;
  is >> kind >> n;
  std::optional<Grid> grid;
  if (kind == "torus") {
    int N = 0;
    is >> N;
    grid = Grid::torus(n, N);
  } else if (kind == "box") {
    int N = 0, order = 0;
    double collar = 0.0;
    is >> N >> order >> collar;
    std::vector<double> lo(n), hi(n);
    for (int a = 0; a < n; ++a) is >> lo[a] >> hi[a];
    if (!is) throw MeshError("mesh file: malformed box descriptor");
    grid = Grid::box(lo, hi, N, order, collar);
  } else {
    throw MeshError("mesh file: unknown domain kind '" + kind + "'");
  }
  expect("orientation");
  int orientation = 1;
  is >> orientation;
  const int D = model->dim;
  std::vector<std::vector<double>> wraps;
  if (grid->is_torus()) {
    expect("wraps");
    int nw = 0;
    is >> nw;
    for (int a = 0; a < nw; ++a) wraps.push_back(read_rows(1, D));
  }
  expect("positions");
  std::size_t count = 0;
  int d = 0;
  is >> count >> d;
  if (count != grid->nodes() || d != D) throw MeshError("mesh file: position block does not match the domain");
  auto pos = read_rows(count, D);
  std::shared_ptr<const std::vector<double>> reference;
  if (!grid->is_torus()) {
    expect("reference");
    is >> count >> d;
    if (count != grid->nodes() || d != D) throw MeshError("mesh file: reference block does not match the domain");
    reference = std::make_shared<const std::vector<double>>(read_rows(count, D));
  }
  return LagMesh(model, *grid, std::move(pos), std::move(wraps), orientation, reference);
}

inline void save_mesh(const std::string& path, const LagMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw MeshError("cannot write " + path);
  write_mesh(os, mesh);
}

inline LagMesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("cannot read " + path);
  return read_mesh(is);
}

/// CSV with columns node, u_1..u_n, then one column per named field.
inline void write_fields_csv(std::ostream& os, const LagMesh& mesh,
                             const std::vector<std::pair<std::string, ScalarField>>& fields) {
  os << "node";
  for (int a = 0; a < mesh.n(); ++a) os << ",u" << a + 1;
  for (const auto& [name, f] : fields) {
    if (f.size() != mesh.nodes()) throw MeshError("field '" + name + "' does not match the mesh");
    os << ',' << name;
  }
  os << "\n";
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    os << k;
    for (int a = 0; a < mesh.n(); ++a) os << ',' << format_double(mesh.grid().param(k, a));
    for (const auto& f : fields) os << ',' << format_double(f.second[k]);
    os << "\n";
  }
}

}  // namespace lagcal
