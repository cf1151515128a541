#pragma once

// Degree-2 quadrature on Voronoi cells (simplex decomposition from the
// centroid) and on faces (Gauss segments, triangulated polygons).

#include "fpm/geometry.hpp"

#include <vector>

namespace fpm {

struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
    double total() const;
};

QuadratureRule cell_quadrature(const Cell& cell, int dim);
QuadratureRule face_quadrature(const Face& face, int dim);

/// Degree-2 rules on a single triangle / tetrahedron (exposed for tests).
void triangle_rule(const Point& a, const Point& b, const Point& c, QuadratureRule& out);
void tetrahedron_rule(const Point& a, const Point& b, const Point& c, const Point& d, QuadratureRule& out);

}  // namespace fpm
