#include "fpm/quadrature.hpp"

#include <cmath>
#include <numeric>

namespace fpm {

double QuadratureRule::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void triangle_rule(const Point& a, const Point& b, const Point& c, QuadratureRule& out) {
    const double area = 0.5 * (b - a).cross(c - a).norm();
    if (area == 0.0) return;
    const double w = area / 3.0;
    constexpr double s = 1.0 / 6.0;
    constexpr double t = 2.0 / 3.0;
    out.points.push_back(t * a + s * b + s * c);
    out.points.push_back(s * a + t * b + s * c);
    out.points.push_back(s * a + s * b + t * c);
    out.weights.insert(out.weights.end(), {w, w, w});
}

void tetrahedron_rule(const Point& a, const Point& b, const Point& c, const Point& d, QuadratureRule& out) {
    const double vol = std::abs((b - a).dot((c - a).cross(d - a))) / 6.0;
    if (vol == 0.0) return;
    constexpr double p = 0.5854101966249685;
    constexpr double q = 0.1381966011250105;
    const double w = 0.25 * vol;
    out.points.push_back(p * a + q * b + q * c + q * d);
    out.points.push_back(q * a + p * b + q * c + q * d);
    out.points.push_back(q * a + q * b + p * c + q * d);
    out.points.push_back(q * a + q * b + q * c + p * d);
    out.weights.insert(out.weights.end(), {w, w, w, w});
}

namespace {

Point polygon_center(const std::vector<Point>& v) {
    Point c = Point::Zero();
    for (const auto& p : v) c += p;
    return c / static_cast<double>(v.size());
}

}  // namespace

QuadratureRule cell_quadrature(const Cell& cell, int dim) {
    QuadratureRule rule;
    if (dim == 2) {
        const auto& v = cell.vertices;
        for (std::size_t k = 0; k < v.size(); ++k) triangle_rule(cell.centroid, v[k], v[(k + 1) % v.size()], rule);
        return rule;
    }
    for (const auto& facet : cell.facets) {
        std::vector<Point> fv;
        fv.reserve(facet.size());
        for (int id : facet) fv.push_back(cell.vertices[static_cast<std::size_t>(id)]);
        const Point fc = polygon_center(fv);
        for (std::size_t k = 0; k < fv.size(); ++k) tetrahedron_rule(cell.centroid, fc, fv[k], fv[(k + 1) % fv.size()], rule);
    }
    return rule;
}

QuadratureRule face_quadrature(const Face& face, int dim) {
    QuadratureRule rule;
    if (dim == 2) {
        const Point& a = face.vertices[0];
        const Point& b = face.vertices[1];
        const double g = 0.5 / std::sqrt(3.0);
        const double half = 0.5 * (b - a).norm();
        rule.points.push_back(0.5 * (a + b) - g * (b - a));
        rule.points.push_back(0.5 * (a + b) + g * (b - a));
        rule.weights.insert(rule.weights.end(), {half, half});
        return rule;
    }
    const auto& v = face.vertices;
    const Point fc = polygon_center(v);
    for (std::size_t k = 0; k < v.size(); ++k) triangle_rule(fc, v[k], v[(k + 1) % v.size()], rule);
    return rule;
}

}  // namespace fpm
