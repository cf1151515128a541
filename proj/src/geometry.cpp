#include "fpm/geometry.hpp"

#include "fpm/errors.hpp"
#include "fpm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace fpm {

namespace {

// Facet tags: >= 0 is a Voronoi neighbour id, < 0 encodes the domain
// half-space -(h + 1). kScaffoldTag marks the temporary bounding box used
// while building a domain from half-spaces.
constexpr int kScaffoldTag = std::numeric_limits<int>::min();

int boundary_tag(int half_space) { return -(half_space + 1); }
int half_space_of(int tag) { return -tag - 1; }

double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// ---------------------------------------------------------------------------
// 2D convex polygon with tagged edges: edge k runs from v[k] to v[k+1].

struct Polygon2 {
    std::vector<Point> v;
    std::vector<int> tag;

    bool empty() const { return v.size() < 3; }

    double area() const {
        double a = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) a += cross2(v[k], v[(k + 1) % v.size()]);
        return 0.5 * a;
    }
};

Polygon2 make_box2(const Point& lo, const Point& hi, int tag_xm, int tag_xp, int tag_ym, int tag_yp) {
    Polygon2 p;
    p.v = {Point(lo.x(), lo.y(), 0), Point(hi.x(), lo.y(), 0), Point(hi.x(), hi.y(), 0),
           Point(lo.x(), hi.y(), 0)};
    p.tag = {tag_ym, tag_xp, tag_yp, tag_xm};
    return p;
}

// Keeps the part of `poly` with normal . x <= offset. Returns false when the
// plane does not cut the polygon.
bool clip(Polygon2& poly, const Point& normal, double offset, int new_tag, double eps) {
    const std::size_t n = poly.v.size();
    std::vector<double> s(n);
    bool any_out = false;
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = normal.dot(poly.v[k]) - offset;
        any_out = any_out || s[k] > eps;
    }
    if (!any_out) return false;

    Polygon2 out;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k1 = (k + 1) % n;
        const Point& a = poly.v[k];
        const Point& b = poly.v[k1];
        const double sa = s[k];
        const double sb = s[k1];
        if (sa <= eps) {
            int t = poly.tag[k];
            if (sb > eps && sa >= -eps) t = new_tag;
            out.v.push_back(a);
            out.tag.push_back(t);
        }
        if (sa < -eps && sb > eps) {
            out.v.push_back(a + (b - a) * (sa / (sa - sb)));
            out.tag.push_back(new_tag);
        } else if (sa > eps && sb < -eps) {
            out.v.push_back(a + (b - a) * (sa / (sa - sb)));
            out.tag.push_back(poly.tag[k]);
        }
    }
    // Merge coincident consecutive vertices, keeping the outgoing tag of the later one.
    bool merged = true;
    while (merged && out.v.size() >= 2) {
        merged = false;
        for (std::size_t k = 0; k < out.v.size(); ++k) {
            const std::size_t k1 = (k + 1) % out.v.size();
            if ((out.v[k] - out.v[k1]).norm() <= eps) {
                out.v.erase(out.v.begin() + static_cast<long>(k));
                out.tag.erase(out.tag.begin() + static_cast<long>(k));
                merged = true;
                break;
            }
        }
    }
    poly = std::move(out);
    return true;
}

// ---------------------------------------------------------------------------
// 3D convex polyhedron as a list of tagged planar facets (outward CCW).

struct Facet3 {
    std::vector<Point> v;
    int tag;
};

struct Polyhedron3 {
    std::vector<Facet3> facets;
    bool empty() const { return facets.size() < 4; }
};

Point newell(const std::vector<Point>& v) {
    Point n = Point::Zero();
    for (std::size_t k = 0; k < v.size(); ++k) n += v[k].cross(v[(k + 1) % v.size()]);
    return n;
}

Polyhedron3 make_box3(const Point& lo, const Point& hi, const int tags[6]) {
    const Point c[8] = {{lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
                        {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
                        {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()}};
    Polyhedron3 p;
    p.facets = {
        {{c[0], c[4], c[7], c[3]}, tags[0]},  // -x
        {{c[1], c[2], c[6], c[5]}, tags[1]},  // +x
        {{c[0], c[1], c[5], c[4]}, tags[2]},  // -y
        {{c[3], c[7], c[6], c[2]}, tags[3]},  // +y
        {{c[0], c[3], c[2], c[1]}, tags[4]},  // -z
        {{c[4], c[5], c[6], c[7]}, tags[5]},  // +z
    };
    return p;
}

void dedupe_ring(std::vector<Point>& v, double eps) {
    bool merged = true;
    while (merged && v.size() >= 2) {
        merged = false;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const std::size_t k1 = (k + 1) % v.size();
            if ((v[k] - v[k1]).norm() <= eps) {
                v.erase(v.begin() + static_cast<long>(k1));
                merged = true;
                break;
            }
        }
    }
}

bool clip(Polyhedron3& poly, const Point& normal, double offset, int new_tag, double eps) {
    bool any_out = false;
    for (const auto& f : poly.facets)
        for (const auto& p : f.v) any_out = any_out || normal.dot(p) - offset > eps;
    if (!any_out) return false;

    Polyhedron3 out;
    std::vector<Point> section;
    const double area_eps = eps * eps;
    for (const auto& f : poly.facets) {
        const std::size_t n = f.v.size();
        std::vector<double> s(n);
        for (std::size_t k = 0; k < n; ++k) s[k] = normal.dot(f.v[k]) - offset;
        Facet3 g{{}, f.tag};
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t k1 = (k + 1) % n;
            const double sa = s[k];
            const double sb = s[k1];
            if (sa <= eps) {
                g.v.push_back(f.v[k]);
                if (sa >= -eps) section.push_back(f.v[k]);
            }
            if ((sa < -eps && sb > eps) || (sa > eps && sb < -eps)) {
                const Point p = f.v[k] + (f.v[k1] - f.v[k]) * (sa / (sa - sb));
                g.v.push_back(p);
                section.push_back(p);
            }
        }
        dedupe_ring(g.v, eps);
        if (g.v.size() >= 3 && 0.5 * newell(g.v).norm() > area_eps) out.facets.push_back(std::move(g));
    }

    // Cap polygon on the clipping plane.
    std::vector<Point> cap;
    for (const auto& p : section) {
        bool dup = false;
        for (const auto& q : cap) dup = dup || (p - q).norm() <= 4 * eps;
        if (!dup) cap.push_back(p);
    }
    if (cap.size() >= 3) {
        Point c = Point::Zero();
        for (const auto& p : cap) c += p;
        c /= static_cast<double>(cap.size());
        Point u = (std::abs(normal.x()) < 0.9 ? Point::UnitX() : Point::UnitY()).cross(normal).normalized();
        Point w = normal.cross(u);
        std::vector<std::pair<double, Point>> ang;
        ang.reserve(cap.size());
        for (const auto& p : cap) ang.emplace_back(std::atan2((p - c).dot(w), (p - c).dot(u)), p);
        std::sort(ang.begin(), ang.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        Facet3 g{{}, new_tag};
        for (auto& [a, p] : ang) g.v.push_back(p);
        const Point nw = newell(g.v);
        if (0.5 * nw.norm() > area_eps) {
            if (nw.dot(normal) < 0) std::reverse(g.v.begin(), g.v.end());
            out.facets.push_back(std::move(g));
        }
    }
    poly = std::move(out);
    return true;
}

// ---------------------------------------------------------------------------
// Shared measures.

struct FacetInfo {
    int tag;
    std::vector<Point> vertices;
    double measure;
    Point normal;
    Point centroid;
};

std::vector<FacetInfo> facets_of(const Polygon2& p) {
    std::vector<FacetInfo> out;
    for (std::size_t k = 0; k < p.v.size(); ++k) {
        const Point& a = p.v[k];
        const Point& b = p.v[(k + 1) % p.v.size()];
        const Point d = b - a;
        const double len = d.norm();
        if (len == 0.0) continue;
        out.push_back({p.tag[k], {a, b}, len, Point(d.y(), -d.x(), 0) / len, 0.5 * (a + b)});
    }
    return out;
}

std::vector<FacetInfo> facets_of(const Polyhedron3& p) {
    std::vector<FacetInfo> out;
    for (const auto& f : p.facets) {
        const Point nw = newell(f.v);
        const double area = 0.5 * nw.norm();
        if (area == 0.0) continue;
        Point c = Point::Zero();
        double aw = 0.0;
        for (std::size_t k = 1; k + 1 < f.v.size(); ++k) {
            const double a = 0.5 * (f.v[k] - f.v[0]).cross(f.v[k + 1] - f.v[0]).norm();
            c += a * (f.v[0] + f.v[k] + f.v[k + 1]) / 3.0;
            aw += a;
        }
        out.push_back({f.tag, f.v, area, nw / nw.norm(), aw > 0 ? Point(c / aw) : f.v[0]});
    }
    return out;
}

Cell cell_of(const Polygon2& p) {
    Cell cell;
    cell.vertices = p.v;
    double a = 0.0;
    Point c = Point::Zero();
    for (std::size_t k = 0; k < p.v.size(); ++k) {
        const Point& u = p.v[k];
        const Point& v = p.v[(k + 1) % p.v.size()];
        const double cr = cross2(u, v);
        a += cr;
        c += cr * (u + v);
    }
    cell.volume = 0.5 * a;
    cell.centroid = a != 0.0 ? Point(c / (3.0 * a)) : p.v.front();
    cell.centroid.z() = 0.0;
    return cell;
}

Cell cell_of(const Polyhedron3& p, double eps) {
    Cell cell;
    for (const auto& f : p.facets) {
        std::vector<int> idx;
        for (const auto& x : f.v) {
            int found = -1;
            for (std::size_t q = 0; q < cell.vertices.size(); ++q)
                if ((cell.vertices[q] - x).norm() <= 4 * eps) {
                    found = static_cast<int>(q);
                    break;
                }
            if (found < 0) {
                found = static_cast<int>(cell.vertices.size());
                cell.vertices.push_back(x);
            }
            if (idx.empty() || idx.back() != found) idx.push_back(found);
        }
        while (idx.size() > 1 && idx.front() == idx.back()) idx.pop_back();
        if (idx.size() >= 3) cell.facets.push_back(std::move(idx));
    }
    Point ref = Point::Zero();
    for (const auto& v : cell.vertices) ref += v;
    ref /= static_cast<double>(cell.vertices.size());
    double vol = 0.0;
    Point c = Point::Zero();
    for (const auto& f : p.facets)
        for (std::size_t k = 1; k + 1 < f.v.size(); ++k) {
            const double v6 = (f.v[0] - ref).dot((f.v[k] - ref).cross(f.v[k + 1] - ref));
            vol += v6 / 6.0;
            c += (v6 / 6.0) * (ref + f.v[0] + f.v[k] + f.v[k + 1]) / 4.0;
        }
    cell.volume = vol;
    cell.centroid = vol != 0.0 ? Point(c / vol) : ref;
    return cell;
}

double max_radius(const std::vector<FacetInfo>& facets, const Point& x) {
    double r = 0.0;
    for (const auto& f : facets)
        for (const auto& v : f.vertices) r = std::max(r, (v - x).norm());
    return r;
}

// Domain polytope builders -------------------------------------------------

template <class Poly>
Poly clip_domain(int dim, const std::vector<HalfSpace>& hs, const Point& lo, const Point& hi, double eps);

template <>
Polygon2 clip_domain<Polygon2>(int, const std::vector<HalfSpace>& hs, const Point& lo, const Point& hi,
                               double eps) {
    Polygon2 p = make_box2(lo, hi, kScaffoldTag, kScaffoldTag, kScaffoldTag, kScaffoldTag);
    for (std::size_t h = 0; h < hs.size(); ++h) {
        clip(p, hs[h].normal, hs[h].offset, boundary_tag(static_cast<int>(h)), eps);
        if (p.empty()) throw DegenerateInput("domain half-spaces have empty intersection");
    }
    return p;
}

template <>
Polyhedron3 clip_domain<Polyhedron3>(int, const std::vector<HalfSpace>& hs, const Point& lo,
                                     const Point& hi, double eps) {
    const int t[6] = {kScaffoldTag, kScaffoldTag, kScaffoldTag, kScaffoldTag, kScaffoldTag, kScaffoldTag};
    Polyhedron3 p = make_box3(lo, hi, t);
    for (std::size_t h = 0; h < hs.size(); ++h) {
        clip(p, hs[h].normal, hs[h].offset, boundary_tag(static_cast<int>(h)), eps);
        if (p.empty()) throw DegenerateInput("domain half-spaces have empty intersection");
    }
    return p;
}

template <class Poly>
bool touches_scaffold(const Poly& p) {
    for (const auto& f : facets_of(p))
        if (f.tag == kScaffoldTag) return true;
    return false;
}

std::vector<Point> unique_vertices(const std::vector<FacetInfo>& facets, double eps) {
    std::vector<Point> out;
    for (const auto& f : facets)
        for (const auto& v : f.vertices) {
            bool dup = false;
            for (const auto& q : out) dup = dup || (q - v).norm() <= 4 * eps;
            if (!dup) out.push_back(v);
        }
    return out;
}

template <class Poly>
Poly domain_polytope(const ConvexDomain& d) {
    Point lo = Point::Constant(std::numeric_limits<double>::max());
    Point hi = Point::Constant(std::numeric_limits<double>::lowest());
    for (const auto& v : d.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const Point pad = Point::Constant(0.05 * d.diameter());
    lo -= pad;
    hi += pad;
    if (d.dim() == 2) {
        lo.z() = 0.0;
        hi.z() = 0.0;
    }
    return clip_domain<Poly>(d.dim(), d.half_spaces(), lo, hi, 1e-12 * d.diameter());
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexDomain

ConvexDomain ConvexDomain::box(int dim, const Point& lower, const Point& upper) {
    if (dim != 2 && dim != 3) throw DegenerateInput("dimension must be 2 or 3");
    std::vector<HalfSpace> hs;
    for (int a = 0; a < dim; ++a) {
        if (!(upper[a] > lower[a])) throw DegenerateInput("box upper corner must exceed lower corner");
        Point n = Point::Zero();
        n[a] = -1.0;
        hs.push_back({n, -lower[a]});
        n[a] = 1.0;
        hs.push_back({n, upper[a]});
    }
    return from_half_spaces(dim, std::move(hs));
}

ConvexDomain ConvexDomain::polygon(const std::vector<Point>& vertices) {
    if (vertices.size() < 3) throw DegenerateInput("polygon needs at least 3 vertices");
    std::vector<Point> v = vertices;
    for (auto& p : v) p.z() = 0.0;
    double a = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) a += cross2(v[k], v[(k + 1) % v.size()]);
    if (a < 0) std::reverse(v.begin(), v.end());
    std::vector<HalfSpace> hs;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Point d = v[(k + 1) % v.size()] - v[k];
        if (d.norm() == 0.0) throw DegenerateInput("polygon has repeated vertices");
        const Point n = Point(d.y(), -d.x(), 0).normalized();
        hs.push_back({n, n.dot(v[k])});
    }
    return from_half_spaces(2, std::move(hs));
}

ConvexDomain ConvexDomain::regular_polygon(const Point& center, double radius, int n, double phase) {
    std::vector<Point> v;
    for (int k = 0; k < n; ++k) {
        const double a = phase + 2.0 * std::numbers::pi * k / n;
        v.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a), 0.0);
    }
    return polygon(v);
}

ConvexDomain ConvexDomain::polyhedron(const std::vector<Point>& vertices) {
    if (vertices.size() < 4) throw DegenerateInput("polyhedron needs at least 4 vertices");
    double scale = 0.0;
    for (const auto& p : vertices)
        for (const auto& q : vertices) scale = std::max(scale, (p - q).norm());
    const double tol = 1e-10 * scale;
    std::vector<HalfSpace> hs;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                Point nrm = (vertices[j] - vertices[i]).cross(vertices[k] - vertices[i]);
                if (nrm.norm() <= tol * scale) continue;
                nrm.normalize();
                bool below = true, above = true;
                for (const auto& p : vertices) {
                    const double s = nrm.dot(p - vertices[i]);
                    below = below && s <= tol;
                    above = above && s >= -tol;
                }
                if (!below && !above) continue;
                if (!below) nrm = -nrm;
                const double off = nrm.dot(vertices[i]);
                bool dup = false;
                for (const auto& h : hs) dup = dup || ((h.normal - nrm).norm() < 1e-9 && std::abs(h.offset - off) < tol);
                if (!dup) hs.push_back({nrm, off});
            }
    return from_half_spaces(3, std::move(hs));
}

ConvexDomain ConvexDomain::from_half_spaces(int dim, std::vector<HalfSpace> half_spaces) {
    if (dim != 2 && dim != 3) throw DegenerateInput("dimension must be 2 or 3");
    for (auto& h : half_spaces) {
        if (dim == 2) h.normal.z() = 0.0;
        const double len = h.normal.norm();
        if (len == 0.0) throw DegenerateInput("half-space with zero normal");
        h.normal /= len;
        h.offset /= len;
    }
    ConvexDomain d;
    d.dim_ = dim;
    d.half_spaces_ = std::move(half_spaces);

    // Two passes: a huge scaffold detects unboundedness, a tight one gives
    // accurate vertices.
    auto run = [&](const Point& lo, const Point& hi, double eps) -> std::vector<FacetInfo> {
        if (dim == 2) {
            auto p = clip_domain<Polygon2>(2, d.half_spaces_, lo, hi, eps);
            if (touches_scaffold(p)) throw DegenerateInput("domain is unbounded");
            return facets_of(p);
        }
        auto p = clip_domain<Polyhedron3>(3, d.half_spaces_, lo, hi, eps);
        if (touches_scaffold(p)) throw DegenerateInput("domain is unbounded");
        return facets_of(p);
    };
    const double big = 1e6;
    Point lo = Point::Constant(-big), hi = Point::Constant(big);
    if (dim == 2) lo.z() = hi.z() = 0.0;
    auto coarse = unique_vertices(run(lo, hi, 1e-9), 1e-9);
    lo = Point::Constant(std::numeric_limits<double>::max());
    hi = Point::Constant(std::numeric_limits<double>::lowest());
    for (const auto& v : coarse) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double span = (hi - lo).norm();
    lo -= Point::Constant(0.1 * span);
    hi += Point::Constant(0.1 * span);
    if (dim == 2) lo.z() = hi.z() = 0.0;
    auto facets = run(lo, hi, 1e-13 * span);
    d.vertices_ = unique_vertices(facets, 1e-12 * span);
    for (const auto& p : d.vertices_)
        for (const auto& q : d.vertices_) d.diameter_ = std::max(d.diameter_, (p - q).norm());

    // Drop redundant half-spaces? They simply never produce a facet; keep them.
    if (dim == 2) {
        Polygon2 p = clip_domain<Polygon2>(2, d.half_spaces_, lo, hi, 1e-13 * span);
        d.volume_ = p.area();
    } else {
        Polyhedron3 p = clip_domain<Polyhedron3>(3, d.half_spaces_, lo, hi, 1e-13 * span);
        d.volume_ = cell_of(p, 1e-13 * span).volume;
    }
    if (!(d.volume_ > 0.0)) throw DegenerateInput("domain has zero volume");
    return d;
}

bool ConvexDomain::contains(const Point& x, double tol) const {
    for (const auto& h : half_spaces_)
        if (h.normal.dot(x) - h.offset > tol * diameter_) return false;
    return true;
}

std::string to_string(FaceKind kind) {
    switch (kind) {
        case FaceKind::Internal: return "internal";
        case FaceKind::Dirichlet: return "dirichlet";
        case FaceKind::Neumann: return "neumann";
        case FaceKind::Robin: return "robin";
        case FaceKind::Symmetric: return "symmetric";
        case FaceKind::Crack: return "crack";
    }
    return "unknown";
}

std::vector<std::vector<int>> Partition::cell_faces() const {
    std::vector<std::vector<int>> out(cells.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        out[static_cast<std::size_t>(faces[f].cell)].push_back(static_cast<int>(f));
        if (faces[f].neighbor >= 0) out[static_cast<std::size_t>(faces[f].neighbor)].push_back(static_cast<int>(f));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partition

namespace {

struct CellResult {
    Cell cell;
    std::vector<FacetInfo> facets;
};

template <class Poly>
CellResult build_cell(std::size_t i, const PointCloud& points, const Poly& start,
                      double eps, double coincide) {
    const Point& xi = points.coords[i];
    const std::size_t n = points.size();
    std::vector<std::pair<double, int>> order;
    order.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) order.emplace_back((points.coords[j] - xi).squaredNorm(), static_cast<int>(j));

    Poly poly = start;
    double rmax = max_radius(facets_of(poly), xi);
    std::size_t sorted_end = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k == sorted_end) {
            // Sort the next chunk lazily; most cells terminate early.
            const std::size_t next = std::min(order.size(), std::max<std::size_t>(64, 2 * sorted_end));
            std::nth_element(order.begin() + static_cast<long>(k), order.begin() + static_cast<long>(next - 1),
                             order.end());
            std::sort(order.begin() + static_cast<long>(k), order.begin() + static_cast<long>(next));
            sorted_end = next;
        }
        const auto [d2, j] = order[k];
        const double dist = std::sqrt(d2);
        if (dist <= coincide) {
            std::ostringstream msg;
            msg << "points " << i << " and " << j << " coincide";
            throw DegenerateInput(msg.str());
        }
        if (dist > 2.0 * rmax + eps) break;
        const Point& xj = points.coords[static_cast<std::size_t>(j)];
        const Point nrm = (xj - xi) / dist;
        if (clip(poly, nrm, nrm.dot(0.5 * (xi + xj)), j, eps)) {
            if (poly.empty()) throw EmptyCell("cell " + std::to_string(i) + " clipped to nothing");
            rmax = max_radius(facets_of(poly), xi);
        }
    }
    CellResult r;
    if constexpr (std::is_same_v<Poly, Polygon2>) {
        r.cell = cell_of(poly);
    } else {
        r.cell = cell_of(poly, eps);
    }
    r.facets = facets_of(poly);
    if (!(r.cell.volume > 0.0)) throw EmptyCell("cell " + std::to_string(i) + " has zero volume");
    return r;
}

}  // namespace

Partition build_partition(const PointCloud& points, const ConvexDomain& domain, LengthScale policy) {
    const int dim = domain.dim();
    if (points.dim != dim) throw DegenerateInput("point cloud and domain dimensions differ");
    if (points.boundary.size() != points.size()) throw DegenerateInput("boundary flags do not match points");
    const std::size_t n = points.size();
    if (n == 0) throw DegenerateInput("empty point cloud");
    const double diam = domain.diameter();
    const double eps = 1e-12 * diam;
    const double coincide = 1e-12 * diam;
    for (std::size_t i = 0; i < n; ++i) {
        if (dim == 2 && points.coords[i].z() != 0.0) throw DegenerateInput("2D points must have z = 0");
        if (!domain.contains(points.coords[i], 1e-9))
            throw EmptyCell("point " + std::to_string(i) + " lies outside the domain");
    }

    std::vector<CellResult> results(n);
    if (dim == 2) {
        const Polygon2 start = domain_polytope<Polygon2>(domain);
        parallel_for(n, [&](std::size_t i) { results[i] = build_cell(i, points, start, eps, coincide); });
    } else {
        const Polyhedron3 start = domain_polytope<Polyhedron3>(domain);
        parallel_for(n, [&](std::size_t i) { results[i] = build_cell(i, points, start, eps, coincide); });
    }

    Partition part;
    part.dim = dim;
    part.domain_volume = domain.volume();
    part.diameter = diam;
    const double min_measure = 1e-12 * std::pow(diam, dim - 1);

    // Internal faces: union over both sides, geometry from the lower id when present.
    std::map<std::pair<int, int>, std::pair<const FacetInfo*, const FacetInfo*>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& f : results[i].facets) {
            if (f.tag < 0) continue;
            const int a = static_cast<int>(i);
            const int b = f.tag;
            auto& slot = pairs[{std::min(a, b), std::max(a, b)}];
            (a < b ? slot.first : slot.second) = &f;
        }
    for (const auto& [key, sides] : pairs) {
        const auto [a, b] = key;
        const double ma = sides.first ? sides.first->measure : 0.0;
        const double mb = sides.second ? sides.second->measure : 0.0;
        if (std::max(ma, mb) <= min_measure) continue;
        Face face;
        face.kind = FaceKind::Internal;
        face.cell = a;
        face.neighbor = b;
        if (sides.first) {
            face.vertices = sides.first->vertices;
            face.measure = sides.first->measure;
            face.centroid = sides.first->centroid;
        } else {
            face.vertices = sides.second->vertices;
            std::reverse(face.vertices.begin(), face.vertices.end());
            face.measure = sides.second->measure;
            face.centroid = sides.second->centroid;
        }
        const Point ab = points.coords[static_cast<std::size_t>(b)] - points.coords[static_cast<std::size_t>(a)];
        face.normal = ab / ab.norm();
        face.point_distance = ab.norm();
        part.faces.push_back(std::move(face));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& f : results[i].facets) {
            if (f.tag >= 0 || f.measure <= min_measure) continue;
            Face face;
            face.kind = FaceKind::Neumann;
            face.cell = static_cast<int>(i);
            face.boundary_id = half_space_of(f.tag);
            face.vertices = f.vertices;
            face.measure = f.measure;
            face.normal = f.normal;
            face.centroid = f.centroid;
            face.point_distance = 2.0 * std::abs(f.normal.dot(points.coords[i] - f.centroid));
            part.faces.push_back(std::move(face));
        }
    std::stable_sort(part.faces.begin(), part.faces.end(), [](const Face& x, const Face& y) {
        const bool xb = !x.is_internal(), yb = !y.is_internal();
        if (xb != yb) return !xb;
        if (x.cell != y.cell) return x.cell < y.cell;
        return xb ? x.boundary_id < y.boundary_id : x.neighbor < y.neighbor;
    });

    part.cells.resize(n);
    for (std::size_t i = 0; i < n; ++i) part.cells[i] = std::move(results[i].cell);
    part.adjacency.assign(n, {});
    for (const auto& f : part.faces)
        if (f.is_internal()) {
            part.adjacency[static_cast<std::size_t>(f.cell)].push_back(f.neighbor);
            part.adjacency[static_cast<std::size_t>(f.neighbor)].push_back(f.cell);
        }
    for (auto& a : part.adjacency) std::sort(a.begin(), a.end());
    set_length_scale(part, policy);
    return part;
}

double face_length_scale(const Face& face, LengthScale policy, int dim) {
    const double from_measure = dim == 2 ? face.measure : std::sqrt(face.measure);
    if (policy == LengthScale::FaceMeasure) return from_measure;
    // A point sitting on its own boundary face has no distance to offer.
    if (face.point_distance <= 1e-9 * from_measure) return from_measure;
    return face.point_distance;
}

void set_length_scale(Partition& partition, LengthScale policy) {
    for (auto& f : partition.faces) f.h_e = face_length_scale(f, policy, partition.dim);
}

// ---------------------------------------------------------------------------
// Cracks

namespace {

bool segment_cuts_primitive(const Point& a, const Point& b, const std::vector<Point>& prim, int dim) {
    if (dim == 2) {
        if (prim.size() != 2) throw DegenerateInput("2D crack primitives must be segments");
        const Point& c0 = prim[0];
        const Point& c1 = prim[1];
        const Point cd = c1 - c0;
        const double oa = cross2(cd, a - c0);
        const double ob = cross2(cd, b - c0);
        if (!(oa * ob < 0.0)) return false;  // generating points must lie strictly on opposite sides
        const Point ab = b - a;
        const double p0 = cross2(ab, c0 - a);
        const double p1 = cross2(ab, c1 - a);
        const double tol = 1e-14 * ab.squaredNorm() * std::max(1.0, cd.norm() / ab.norm());
        return p0 * p1 <= tol * tol || (std::abs(p0) <= tol || std::abs(p1) <= tol);
    }
    if (prim.size() < 3) throw DegenerateInput("3D crack primitives must be polygons");
    Point n = newell(prim);
    if (n.norm() == 0.0) throw DegenerateInput("degenerate crack polygon");
    n.normalize();
    const double oa = n.dot(a - prim[0]);
    const double ob = n.dot(b - prim[0]);
    if (!(oa * ob < 0.0)) return false;
    const Point p = a + (b - a) * (oa / (oa - ob));
    const double tol = 1e-12 * (b - a).norm();
    for (std::size_t k = 0; k < prim.size(); ++k) {
        const Point e = prim[(k + 1) % prim.size()] - prim[k];
        if (e.cross(p - prim[k]).dot(n) < -tol * e.norm()) return false;
    }
    return true;
}

}  // namespace

Partition apply_crack(const Partition& partition, const PointCloud& points, const CrackSpec& crack) {
    Partition out = partition;
    out.faces.clear();
    std::vector<Face> crack_faces;
    for (const auto& f : partition.faces) {
        if (!f.is_internal()) {
            out.faces.push_back(f);
            continue;
        }
        const Point& a = points.coords[static_cast<std::size_t>(f.cell)];
        const Point& b = points.coords[static_cast<std::size_t>(f.neighbor)];
        bool cut = false;
        for (const auto& prim : crack.primitives) cut = cut || segment_cuts_primitive(a, b, prim, partition.dim);
        if (!cut) {
            out.faces.push_back(f);
            continue;
        }
        Face lower = f;
        lower.kind = FaceKind::Crack;
        lower.neighbor = -1;
        lower.boundary_id = -1;
        lower.region = -1;
        Face upper = lower;
        upper.cell = f.neighbor;
        upper.normal = -f.normal;
        std::reverse(upper.vertices.begin(), upper.vertices.end());
        crack_faces.push_back(std::move(lower));
        crack_faces.push_back(std::move(upper));
    }
    out.faces.insert(out.faces.end(), crack_faces.begin(), crack_faces.end());
    out.adjacency.assign(partition.cells.size(), {});
    for (const auto& f : out.faces)
        if (f.is_internal()) {
            out.adjacency[static_cast<std::size_t>(f.cell)].push_back(f.neighbor);
            out.adjacency[static_cast<std::size_t>(f.neighbor)].push_back(f.cell);
        }
    for (auto& a : out.adjacency) std::sort(a.begin(), a.end());
    return out;
}

int locate_cell(const PointCloud& points, const Point& x) {
    int best = -1;
    double bd = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points.coords[i] - x).squaredNorm();
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace fpm
