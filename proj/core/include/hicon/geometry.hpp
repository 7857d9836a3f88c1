#pragma once

#include <array>
#include <string>
#include <vector>

#include "hicon/types.hpp"

namespace hicon::geometry {

enum class Region : int { StiffInt = 0, Soft = 1, StiffLs = 2 };
enum class Interface : int { Int = 0, Ls = 1 };

inline constexpr std::array<Region, 3> kRegions = {Region::StiffInt, Region::Soft, Region::StiffLs};

const char* region_name(Region r);
const char* interface_name(Interface g);

struct CellSpec {
  Vec2 center{0.5, 0.5};
  double r_in = 0.2;
  double r_out = 0.35;
  double h = 0.05;
  int n_bnd = 64;
  // Side length of the period cell. 1 for Q; the rescaling check uses eps.
  double period = 1.0;
  // Minimum distance between the outer circle and the cell boundary, in units of period.
  double gap_min = 0.02;
  // Smallest admissible triangle angle (degrees) after edge flipping.
  double min_angle_deg = 20.0;
};

struct Triangle {
  std::array<int, 3> v;
  Region region;
};

struct PeriodCellMesh {
  CellSpec spec;
  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  // interface_loops[g] lists the vertices of Γ_g counterclockwise about the center.
  std::array<std::vector<int>, 2> interface_loops;
  std::array<std::vector<std::array<int, 2>>, 2> interface_edges;
  // periodic_map[v] is the master of v; identity off the slave edges of ∂Q.
  std::vector<int> periodic_map;
  // Vertices v with periodic_map[v] == v, ascending.
  std::vector<int> free_dofs;
  // Vertices lying on ∂Q (masters and slaves), ascending.
  std::vector<int> boundary_vertices;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
};

// Deterministic ring-based triangulation followed by constrained Lawson flips.
PeriodCellMesh build_period_cell(const CellSpec& spec);

// Validates the CellSpec invariants; throws GeometryError.
void validate_spec(const CellSpec& spec);

// Ordered trace DOF list (vertex ids) of Γ_int or Γ_ls.
const std::vector<int>& trace_space(const PeriodCellMesh& mesh, Interface which);

// Copy of the mesh with all coordinates multiplied by s.
PeriodCellMesh scaled(const PeriodCellMesh& mesh, double s);

double triangle_area(const PeriodCellMesh& mesh, const Triangle& t);
double region_area(const PeriodCellMesh& mesh, Region r);
double interface_length(const PeriodCellMesh& mesh, Interface g);
double min_angle_deg(const PeriodCellMesh& mesh);

// Structural checks: positive areas, conforming interfaces, periodic layout, area partition.
// Returns an empty string when valid, else a description of the first violation.
std::string check_mesh(const PeriodCellMesh& mesh);

// Byte-stable JSON export/import.
std::string to_json(const PeriodCellMesh& mesh);
PeriodCellMesh from_json(const std::string& text);

}  // namespace hicon::geometry
