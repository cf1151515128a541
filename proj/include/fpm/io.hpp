#pragma once

// Output writers (CSV, legacy VTK, Matrix Market, JSON) and point import.

#include "fpm/assembly.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace fpm {

/// Nodal temperatures, one row per (snapshot, point): t,id,x,y[,z],u with 17
/// significant digits.
void write_csv(std::ostream& out, const PointCloud& points, const std::vector<double>& times,
               const std::vector<Vector>& states);

/// Legacy ASCII unstructured grid of the partition. 2D cells are polygons;
/// 3D cells are split into tetrahedra (cell centroid + facet fans). Every
/// entry of `cell_data` holds one value per Voronoi cell and is written as
/// CELL_DATA; `point_id` is always included.
void write_vtk(std::ostream& out, const Partition& partition, const std::map<std::string, Vector>& cell_data = {});

/// Coordinate format, general (unsymmetric) real matrix.
void write_matrix_market(std::ostream& out, const SparseMatrix& A);

/// Reads x,y[,z],boundary_flag rows; a non-numeric first line is treated as a
/// header. Throws IoError on unreadable files or malformed rows.
PointCloud read_points_csv(const std::filesystem::path& path, int dim);

/// Opens `path` for writing, creating parent directories. Throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace fpm
