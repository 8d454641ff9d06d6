#include "nitsche/field_io.hpp"

#include <array>
#include <iomanip>
#include <ostream>
#include <vector>

namespace nitsche {

void write_csv(const FeFunction& f, std::ostream& os) {
  const auto& x = f.space().dof_coordinates();
  const auto& c = f.coefficients();
  os << "dof_index,x,y,value\n" << std::scientific << std::setprecision(12);
  for (int d = 0; d < f.space().num_dofs(); ++d)
    os << d << ',' << x[d].x() << ',' << x[d].y() << ',' << c(d) << '\n';
  os << std::defaultfloat;
}

void write_vtk(const FeFunction& f, std::ostream& os, const std::string& name) {
  const FeSpace& space = f.space();
  std::vector<std::array<int, 3>> cells;
  cells.reserve(space.num_elements() * (space.order() == 1 ? 1 : 4));
  for (int k = 0; k < space.num_elements(); ++k) {
    const auto d = space.element_dofs(k);
    if (space.order() == 1) {
      cells.push_back({d[0], d[1], d[2]});
    } else {
      // d[3 + i] is the midpoint opposite vertex i
      cells.push_back({d[0], d[5], d[4]});
      cells.push_back({d[5], d[1], d[3]});
      cells.push_back({d[4], d[3], d[2]});
      cells.push_back({d[3], d[4], d[5]});
    }
  }
  const auto& x = space.dof_coordinates();
  os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::scientific << std::setprecision(10);
  os << "POINTS " << x.size() << " double\n";
  for (const auto& p : x) os << p.x() << ' ' << p.y() << " 0\n";
  os << "CELLS " << cells.size() << ' ' << 4 * cells.size() << '\n';
  for (const auto& c : cells) os << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  os << "CELL_TYPES " << cells.size() << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) os << "5\n";
  os << "POINT_DATA " << x.size() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < space.num_dofs(); ++i) os << f.coefficients()(i) << '\n';
  os << std::defaultfloat;
}

}  // namespace nitsche
