#pragma once

// Voronoi partition of a convex 2D/3D domain built by half-space clipping.
//
// All coordinates are stored as Eigen::Vector3d; in 2D the z component is
// zero and ignored. Cells of 2D partitions are convex polygons (CCW), cells of
// 3D partitions are convex polyhedra given as a list of planar facets.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fpm {

using Point = Eigen::Vector3d;

struct PointCloud {
    int dim = 2;
    std::vector<Point> coords;
    std::vector<std::uint8_t> boundary;  // 1 if the point lies on the domain boundary

    std::size_t size() const { return coords.size(); }
    void add(const Point& p, bool on_boundary) {
        coords.push_back(p);
        boundary.push_back(on_boundary ? 1 : 0);
    }
};

struct HalfSpace {
    Point normal;   // unit outward normal
    double offset;  // normal . x <= offset inside
};

/// A bounded convex polygon (2D) or polyhedron (3D).
class ConvexDomain {
public:
    /// Axis-aligned box; half-spaces ordered -x, +x, -y, +y[, -z, +z].
    static ConvexDomain box(int dim, const Point& lower, const Point& upper);
    /// Convex polygon from its vertices (either orientation).
    static ConvexDomain polygon(const std::vector<Point>& vertices);
    /// Regular n-gon inscribed in the circle of given center and radius,
    /// first vertex at angle `phase`.
    static ConvexDomain regular_polygon(const Point& center, double radius, int n, double phase = 0.0);
    /// Convex hull of a small set of 3D vertices.
    static ConvexDomain polyhedron(const std::vector<Point>& vertices);
    /// Intersection of half-spaces; throws DegenerateInput if empty or unbounded.
    static ConvexDomain from_half_spaces(int dim, std::vector<HalfSpace> half_spaces);

    int dim() const { return dim_; }
    const std::vector<HalfSpace>& half_spaces() const { return half_spaces_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    double diameter() const { return diameter_; }
    double volume() const { return volume_; }
    bool contains(const Point& x, double tol = 1e-10) const;

private:
    int dim_ = 2;
    std::vector<HalfSpace> half_spaces_;
    std::vector<Point> vertices_;
    double diameter_ = 0.0;
    double volume_ = 0.0;
};

enum class FaceKind { Internal, Dirichlet, Neumann, Robin, Symmetric, Crack };

std::string to_string(FaceKind kind);

struct Face {
    FaceKind kind = FaceKind::Internal;
    int cell = -1;           // owning cell (E1 for internal faces)
    int neighbor = -1;       // E2 for internal faces, -1 otherwise
    int boundary_id = -1;    // index of the domain half-space for boundary faces
    int region = -1;         // boundary region assigned by classification
    std::vector<Point> vertices;  // segment endpoints (2D) or polygon (3D)
    double measure = 0.0;
    Point normal = Point::Zero();   // outward from `cell`
    Point centroid = Point::Zero();
    double point_distance = 0.0;    // see face_length_scale
    double h_e = 0.0;

    bool is_internal() const { return neighbor >= 0; }
};

struct Cell {
    std::vector<Point> vertices;                 // 2D: CCW polygon
    std::vector<std::vector<int>> facets;        // 3D: facet polygons, outward CCW
    double volume = 0.0;
    Point centroid = Point::Zero();
};

struct Partition {
    int dim = 2;
    std::vector<Cell> cells;
    std::vector<Face> faces;
    std::vector<std::vector<int>> adjacency;  // sorted Voronoi neighbours per point
    double domain_volume = 0.0;
    double diameter = 0.0;

    /// Face ids touching each cell (internal faces appear in both cells).
    std::vector<std::vector<int>> cell_faces() const;
};

enum class LengthScale { FaceMeasure, PointDistance };

/// Voronoi partition of `domain` generated by `points`.
Partition build_partition(const PointCloud& points, const ConvexDomain& domain,
                          LengthScale policy = LengthScale::FaceMeasure);

/// Face length scale: the face length (2D) or sqrt(area) (3D), or the distance
/// between generating points (twice the point-to-face distance on boundary
/// faces, falling back to the face measure for points lying on the face).
double face_length_scale(const Face& face, LengthScale policy, int dim);

/// Recompute h_e of every face under `policy`.
void set_length_scale(Partition& partition, LengthScale policy);

struct CrackSpec {
    /// 2D: each primitive is a segment (2 points). 3D: a planar convex polygon.
    std::vector<std::vector<Point>> primitives;
};

/// Faces whose generating points straddle a crack primitive become a pair of
/// adiabatic boundary faces; the adjacency between the two points is removed.
Partition apply_crack(const Partition& partition, const PointCloud& points, const CrackSpec& crack);

/// Index of the generating point nearest to x (= the cell containing x).
int locate_cell(const PointCloud& points, const Point& x);

/// Selector used to classify boundary faces: receives the face centroid and
/// outward normal.
using FaceSelector = std::function<bool(const Point& centroid, const Point& normal)>;

}  // namespace fpm
