#pragma once

#include <iosfwd>
#include <string>

#include "nitsche/fespace.hpp"

namespace nitsche {

/// `dof_index,x,y,value` rows with a header line.
void write_csv(const FeFunction& f, std::ostream& os);

/// VTK legacy ASCII unstructured grid with the field as POINT_DATA. P2
/// fields are written on the once-refined submesh (four triangles per
/// element) so every dof is a grid point.
void write_vtk(const FeFunction& f, std::ostream& os, const std::string& name = "u");

}  // namespace nitsche
