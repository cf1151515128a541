#include "fpm/config.hpp"

#include "fpm/errors.hpp"
#include "fpm/io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <regex>
#include <sstream>

namespace fpm {

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& msg) const {
        std::ostringstream out;
        out << source_;
        if (node.IsDefined() && !node.Mark().is_null()) out << ':' << node.Mark().line + 1;
        out << ": " << key << ": " << msg;
        throw SchemaError(out.str());
    }

    void require_map(const YAML::Node& node, const std::string& key) const {
        if (!node.IsMap()) fail(node, key, "expected a mapping");
    }

    void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) const {
        require_map(node, path);
        for (const auto& kv : node) {
            const auto name = kv.first.as<std::string>();
            if (!allowed.count(name)) fail(kv.first, path.empty() ? name : path + "." + name, "unknown key");
        }
    }

    double number(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key, "expected a number");
        try {
            return node.as<double>();
        } catch (const YAML::Exception&) {
            fail(node, key, "expected a number");
        }
    }

    int integer(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key, "expected an integer");
        try {
            return node.as<int>();
        } catch (const YAML::Exception&) {
            fail(node, key, "expected an integer");
        }
    }

    std::string text(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key, "expected a string");
        return node.as<std::string>();
    }

    bool boolean(const YAML::Node& node, const std::string& key) const {
        try {
            return node.as<bool>();
        } catch (const YAML::Exception&) {
            fail(node, key, "expected true or false");
        }
    }

    std::vector<double> numbers(const YAML::Node& node, const std::string& key) const {
        if (!node.IsSequence()) fail(node, key, "expected a list of numbers");
        std::vector<double> out;
        for (const auto& v : node) out.push_back(number(v, key));
        return out;
    }

    Point point(const YAML::Node& node, const std::string& key, int dim) const {
        const auto v = numbers(node, key);
        if (static_cast<int>(v.size()) != dim) fail(node, key, "expected " + std::to_string(dim) + " coordinates");
        Point p = Point::Zero();
        for (int a = 0; a < dim; ++a) p[a] = v[static_cast<std::size_t>(a)];
        return p;
    }

    std::vector<Point> points(const YAML::Node& node, const std::string& key, int dim) const {
        if (!node.IsSequence()) fail(node, key, "expected a list of points");
        std::vector<Point> out;
        for (const auto& p : node) out.push_back(point(p, key, dim));
        return out;
    }

    double positive(const YAML::Node& node, const std::string& key) const {
        const double v = number(node, key);
        if (!(v > 0.0)) fail(node, key, "must be positive");
        return v;
    }

    double non_negative(const YAML::Node& node, const std::string& key) const {
        const double v = number(node, key);
        if (!(v >= 0.0)) fail(node, key, "must be non-negative");
        return v;
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

int axis_index(char c) { return c == 'x' ? 0 : c == 'y' ? 1 : 2; }

// "x=<v>" style plane selector, or "all" for the fallback region.
FaceSelector parse_selector(const Reader& r, const YAML::Node& node, const std::string& key, int dim) {
    const std::string s = r.text(node, key);
    if (s == "all") return {};
    static const std::regex plane(R"(\s*([xyz])\s*=\s*([-+0-9.eE]+)\s*)");
    std::smatch m;
    if (!std::regex_match(s, m, plane)) r.fail(node, key, "expected 'x=<value>', 'y=<value>', 'z=<value>' or 'all'");
    const int axis = axis_index(m[1].str()[0]);
    if (axis >= dim) r.fail(node, key, "axis not available in " + std::to_string(dim) + "D");
    return plane_selector(axis, std::stod(m[2].str()));
}

// "<axis><op><value>" spatial predicate.
std::function<bool(const Point&)> parse_condition(const Reader& r, const YAML::Node& node, const std::string& key,
                                                  int dim) {
    const std::string s = r.text(node, key);
    static const std::regex cond(R"(\s*([xyz])\s*(<=|>=|<|>)\s*([-+0-9.eE]+)\s*)");
    std::smatch m;
    if (!std::regex_match(s, m, cond)) r.fail(node, key, "expected '<axis><op><value>' with op one of < > <= >=");
    const int axis = axis_index(m[1].str()[0]);
    if (axis >= dim) r.fail(node, key, "axis not available in " + std::to_string(dim) + "D");
    const std::string op = m[2].str();
    const double v = std::stod(m[3].str());
    if (op == "<") return [=](const Point& x) { return x[axis] < v; };
    if (op == ">") return [=](const Point& x) { return x[axis] > v; };
    if (op == "<=") return [=](const Point& x) { return x[axis] <= v; };
    return [=](const Point& x) { return x[axis] >= v; };
}

// Scalar constant or {step: a} meaning a * H(t).
SpaceTimeField parse_value(const Reader& r, const YAML::Node& node, const std::string& key) {
    if (node.IsMap()) {
        r.check_keys(node, key, {"step"});
        if (!node["step"]) r.fail(node, key, "expected 'step'");
        const double a = r.number(node["step"], key + ".step");
        return [a](const Point&, double t) { return a * heaviside(t); };
    }
    const double v = r.number(node, key);
    return [v](const Point&, double) { return v; };
}

Eigen::Matrix3d parse_conductivity(const Reader& r, const YAML::Node& node, const std::string& key, int dim) {
    if (node.IsScalar()) return r.positive(node, key) * Eigen::Matrix3d::Identity();
    if (!node.IsSequence() || static_cast<int>(node.size()) != dim)
        r.fail(node, key, "expected a scalar or a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    for (int i = 0; i < dim; ++i) {
        const auto row = r.numbers(node[static_cast<std::size_t>(i)], key);
        if (static_cast<int>(row.size()) != dim) r.fail(node, key, "matrix rows must have " + std::to_string(dim) + " entries");
        for (int j = 0; j < dim; ++j) k(i, j) = row[static_cast<std::size_t>(j)];
    }
    return k;
}

ConvexDomain parse_domain(const Reader& r, const YAML::Node& node, int& dim) {
    r.check_keys(node, "domain", {"box", "polygon", "polyhedron"});
    if (node.size() != 1) r.fail(node, "domain", "expected exactly one of box, polygon, polyhedron");
    if (const auto box = node["box"]) {
        r.check_keys(box, "domain.box", {"lower", "upper"});
        if (!box["lower"] || !box["upper"]) r.fail(box, "domain.box", "expected 'lower' and 'upper'");
        const auto lo = r.numbers(box["lower"], "domain.box.lower");
        dim = static_cast<int>(lo.size());
        if (dim != 2 && dim != 3) r.fail(box["lower"], "domain.box.lower", "expected 2 or 3 coordinates");
        const Point lower = r.point(box["lower"], "domain.box.lower", dim);
        const Point upper = r.point(box["upper"], "domain.box.upper", dim);
        for (int a = 0; a < dim; ++a)
            if (!(upper[a] > lower[a])) r.fail(box, "domain.box", "upper must exceed lower on every axis");
        return ConvexDomain::box(dim, lower, upper);
    }
    try {
        if (const auto poly = node["polygon"]) {
            dim = 2;
            return ConvexDomain::polygon(r.points(poly, "domain.polygon", 2));
        }
        dim = 3;
        return ConvexDomain::polyhedron(r.points(node["polyhedron"], "domain.polyhedron", 3));
    } catch (const DegenerateInput& e) {
        r.fail(node, "domain", e.what());
    }
}

PointsConfig parse_points(const Reader& r, const YAML::Node& node, int dim) {
    r.check_keys(node, "points", {"file", "grid", "cell_centered", "random"});
    int given = 0;
    for (const char* k : {"file", "grid", "cell_centered", "random"}) given += node[k] ? 1 : 0;
    if (given > 1) r.fail(node, "points", "'file', 'grid', 'cell_centered' and 'random' are mutually exclusive");
    if (given == 0) r.fail(node, "points", "expected one of file, grid, cell_centered, random");
    PointsConfig pc;
    if (node["file"]) {
        pc.layout = PointsConfig::Layout::File;
        pc.file = r.text(node["file"], "points.file");
    } else if (node["random"]) {
        const auto rnd = node["random"];
        r.check_keys(rnd, "points.random", {"count", "boundary", "seed"});
        pc.layout = PointsConfig::Layout::Random;
        if (!rnd["count"]) r.fail(rnd, "points.random", "expected 'count'");
        pc.total = r.integer(rnd["count"], "points.random.count");
        pc.boundary = rnd["boundary"] ? r.integer(rnd["boundary"], "points.random.boundary") : 0;
        if (rnd["seed"]) {
            try {
                pc.seed = rnd["seed"].as<std::uint64_t>();
            } catch (const YAML::Exception&) {
                r.fail(rnd["seed"], "points.random.seed", "expected a non-negative integer");
            }
        }
        if (pc.total < 1) r.fail(rnd["count"], "points.random.count", "must be positive");
        if (pc.boundary < 0 || pc.boundary > pc.total)
            r.fail(rnd, "points.random.boundary", "must lie between 0 and count");
    } else {
        const bool grid = static_cast<bool>(node["grid"]);
        const std::string key = grid ? "points.grid" : "points.cell_centered";
        const auto counts = node[grid ? "grid" : "cell_centered"];
        pc.layout = grid ? PointsConfig::Layout::Grid : PointsConfig::Layout::CellCentered;
        if (counts.IsScalar()) {
            pc.counts.assign(static_cast<std::size_t>(dim), r.integer(counts, key));
        } else {
            if (!counts.IsSequence() || static_cast<int>(counts.size()) != dim)
                r.fail(counts, key, "expected a count or " + std::to_string(dim) + " counts");
            for (const auto& c : counts) pc.counts.push_back(r.integer(c, key));
        }
        for (int c : pc.counts)
            if (c < (grid ? 2 : 1)) r.fail(counts, key, grid ? "counts must be at least 2" : "counts must be positive");
    }
    return pc;
}

Gradation parse_gradation(const Reader& r, const YAML::Node& node, const std::string& key) {
    const std::string s = r.text(node, key);
    if (s == "exponential") return Gradation::Exponential;
    if (s == "exp_square") return Gradation::ExpSquare;
    if (s == "trigonometric") return Gradation::Trigonometric;
    if (s == "power_law") return Gradation::PowerLaw;
    r.fail(node, key, "expected exponential, exp_square, trigonometric or power_law");
}

MaterialField parse_material(const Reader& r, const YAML::Node& node, int dim) {
    r.check_keys(node, "material", {"rho", "c", "k", "gradation", "regions"});
    const double rho = node["rho"] ? r.positive(node["rho"], "material.rho") : 1.0;
    const double c = node["c"] ? r.positive(node["c"], "material.c") : 1.0;
    const Eigen::Matrix3d k = node["k"] ? parse_conductivity(r, node["k"], "material.k", dim)
                                        : Eigen::Matrix3d::Identity().eval();
    MaterialField m = MaterialField::constant(rho, c, k);

    struct Piece {
        std::function<bool(const Point&)> where;
        std::optional<double> rho, c;
        std::optional<Eigen::Matrix3d> k;
    };
    std::vector<Piece> pieces;
    if (const auto regions = node["regions"]) {
        if (!regions.IsSequence()) r.fail(regions, "material.regions", "expected a list");
        for (const auto& reg : regions) {
            r.check_keys(reg, "material.regions", {"where", "rho", "c", "k"});
            if (!reg["where"]) r.fail(reg, "material.regions", "expected 'where'");
            Piece p;
            p.where = parse_condition(r, reg["where"], "material.regions.where", dim);
            if (reg["rho"]) p.rho = r.positive(reg["rho"], "material.regions.rho");
            if (reg["c"]) p.c = r.positive(reg["c"], "material.regions.c");
            if (reg["k"]) p.k = parse_conductivity(r, reg["k"], "material.regions.k", dim);
            pieces.push_back(std::move(p));
        }
    }
    if (!pieces.empty()) {
        m.rho = [pieces, rho](const Point& x) {
            for (const auto& p : pieces)
                if (p.where(x)) return p.rho.value_or(rho);
            return rho;
        };
        m.c = [pieces, c](const Point& x) {
            for (const auto& p : pieces)
                if (p.where(x)) return p.c.value_or(c);
            return c;
        };
        m.k = [pieces, k](const Point& x) -> Eigen::Matrix3d {
            for (const auto& p : pieces)
                if (p.where(x)) return p.k.value_or(k);
            return k;
        };
    }

    if (const auto g = node["gradation"]) {
        r.check_keys(g, "material.gradation", {"profile", "delta", "L"});
        if (!g["profile"]) r.fail(g, "material.gradation", "expected 'profile'");
        const Gradation kind = parse_gradation(r, g["profile"], "material.gradation.profile");
        const double delta = g["delta"] ? r.number(g["delta"], "material.gradation.delta") : 0.0;
        const double L = g["L"] ? r.positive(g["L"], "material.gradation.L") : 1.0;
        const auto f = gradation_profile(kind, delta, L);
        const ScalarField c0 = m.c;
        const TensorField k0 = m.k;
        m.c = [f, c0](const Point& x) { return c0(x) * f(x.y()); };
        m.k = [f, k0](const Point& x) -> Eigen::Matrix3d { return f(x.y()) * k0(x); };
    }
    return m;
}

BcKind parse_bc_kind(const Reader& r, const YAML::Node& node, const std::string& key) {
    const std::string s = r.text(node, key);
    if (s == "dirichlet") return BcKind::Dirichlet;
    if (s == "neumann") return BcKind::Neumann;
    if (s == "robin") return BcKind::Robin;
    if (s == "symmetric") return BcKind::Symmetric;
    r.fail(node, key, "expected dirichlet, neumann, robin or symmetric");
}

std::vector<BoundaryRegion> parse_boundary(const Reader& r, const YAML::Node& node, int dim) {
    if (!node.IsSequence() || node.size() == 0) r.fail(node, "boundary", "expected a non-empty list of regions");
    std::vector<BoundaryRegion> regions;
    for (const auto& b : node) {
        r.check_keys(b, "boundary", {"name", "on", "kind", "value", "h"});
        if (!b["kind"]) r.fail(b, "boundary", "expected 'kind'");
        BoundaryRegion reg;
        reg.name = b["name"] ? r.text(b["name"], "boundary.name") : "region" + std::to_string(regions.size());
        reg.kind = parse_bc_kind(r, b["kind"], "boundary.kind");
        if (b["on"]) reg.selector = parse_selector(r, b["on"], "boundary.on", dim);
        if (reg.kind != BcKind::Symmetric) {
            reg.value = b["value"] ? parse_value(r, b["value"], "boundary.value")
                                   : [](const Point&, double) { return 0.0; };
        } else if (b["value"]) {
            r.fail(b["value"], "boundary.value", "symmetric regions take no value");
        }
        if (reg.kind == BcKind::Robin) {
            if (!b["h"]) r.fail(b, "boundary.h", "robin regions need a heat transfer coefficient");
            const double h = r.positive(b["h"], "boundary.h");
            reg.h = [h](const Point&) { return h; };
        } else if (b["h"]) {
            r.fail(b["h"], "boundary.h", "only robin regions take 'h'");
        }
        regions.push_back(std::move(reg));
    }
    return regions;
}

const std::set<std::string> kCaseSolverKeys = {"eta1", "eta2", "dt", "T", "M", "tol"};
const std::set<std::string> kSolverKeys = {"scheme", "eta1", "eta2", "he",  "M",         "tol",
                                           "max_iter", "dt", "T",   "dirichlet", "strong_faces"};

void parse_solver(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
    const bool case_mode = cfg.case_id.has_value();
    r.check_keys(node, "solver", case_mode ? kCaseSolverKeys : kSolverKeys);
    if (case_mode) {
        auto& ov = cfg.overrides;
        if (node["eta1"]) ov.eta1 = r.positive(node["eta1"], "eta1");
        if (node["eta2"]) ov.eta2 = r.non_negative(node["eta2"], "eta2");
        if (node["dt"]) ov.dt = r.positive(node["dt"], "dt");
        if (node["T"]) ov.T = r.non_negative(node["T"], "T");
        if (node["tol"]) ov.tol = r.positive(node["tol"], "tol");
        if (node["M"]) {
            ov.M = r.integer(node["M"], "M");
            if (*ov.M < 2) r.fail(node["M"], "M", "must be at least 2");
        }
        return;
    }
    if (node["eta1"]) cfg.assembly.eta1 = r.positive(node["eta1"], "eta1");
    if (node["eta2"]) cfg.assembly.eta2 = r.non_negative(node["eta2"], "eta2");
    if (node["he"]) {
        const std::string he = r.text(node["he"], "he");
        if (he == "face_measure") cfg.assembly.he_policy = LengthScale::FaceMeasure;
        else if (he == "point_distance") cfg.assembly.he_policy = LengthScale::PointDistance;
        else r.fail(node["he"], "he", "expected face_measure or point_distance");
    }
    if (node["strong_faces"]) {
        const std::string s = r.text(node["strong_faces"], "strong_faces");
        if (s == "skip") cfg.assembly.strong_face_terms = StrongFaceTerms::Skip;
        else if (s == "consistency") cfg.assembly.strong_face_terms = StrongFaceTerms::Consistency;
        else if (s == "full") cfg.assembly.strong_face_terms = StrongFaceTerms::Full;
        else r.fail(node["strong_faces"], "strong_faces", "expected skip, consistency or full");
    }
    if (node["dirichlet"]) {
        const std::string s = r.text(node["dirichlet"], "dirichlet");
        if (s == "strong") cfg.problem.dirichlet_mode = DirichletMode::Strong;
        else if (s == "penalty") cfg.problem.dirichlet_mode = DirichletMode::Penalty;
        else r.fail(node["dirichlet"], "dirichlet", "expected strong or penalty");
    }
    const std::string scheme = node["scheme"] ? r.text(node["scheme"], "scheme") : "lvim";
    if (scheme == "lvim") {
        LvimConfig lc;
        if (node["M"]) {
            lc.M = r.integer(node["M"], "M");
            if (lc.M < 2) r.fail(node["M"], "M", "must be at least 2");
        }
        if (node["tol"]) lc.tol = r.positive(node["tol"], "tol");
        if (node["max_iter"]) {
            lc.max_iter = r.integer(node["max_iter"], "max_iter");
            if (lc.max_iter < 1) r.fail(node["max_iter"], "max_iter", "must be positive");
        }
        cfg.scheme = lc;
    } else if (scheme == "backward_euler" || scheme == "steady") {
        cfg.scheme = BackwardEuler{};
    } else if (scheme == "forward_euler") {
        cfg.scheme = ForwardEuler{};
    } else {
        r.fail(node["scheme"], "scheme", "expected lvim, backward_euler, forward_euler or steady");
    }
    if (scheme != "lvim")
        for (const char* k : {"M", "tol", "max_iter"})
            if (node[k]) r.fail(node[k], k, "only used by the lvim scheme");
    if (scheme == "steady") {
        if (node["dt"] || node["T"]) r.fail(node, "solver", "steady runs take no dt or T");
        cfg.T = 0.0;
        return;
    }
    if (!node["dt"] || !node["T"]) r.fail(node, "solver", "transient runs need 'dt' and 'T'");
    cfg.dt = r.positive(node["dt"], "dt");
    cfg.T = r.positive(node["T"], "T");
}

void parse_output(const Reader& r, const YAML::Node& node, OutputConfig& out) {
    r.check_keys(node, "output", {"directory", "formats", "snapshots", "matrices"});
    if (node["directory"]) out.directory = r.text(node["directory"], "output.directory");
    if (const auto f = node["formats"]) {
        if (!f.IsSequence()) r.fail(f, "output.formats", "expected a list");
        out.formats.clear();
        for (const auto& v : f) {
            const std::string s = r.text(v, "output.formats");
            if (s != "csv" && s != "vtk" && s != "json") r.fail(v, "output.formats", "expected csv, vtk or json");
            out.formats.insert(s);
        }
    }
    if (node["snapshots"]) out.snapshots = r.numbers(node["snapshots"], "output.snapshots");
    if (node["matrices"]) out.matrices = r.boolean(node["matrices"], "output.matrices");
}

RunConfig parse(const YAML::Node& root, const std::string& source) {
    const Reader r(source);
    RunConfig cfg;
    cfg.source = source;
    r.require_map(root, "<root>");
    if (root["case"]) {
        r.check_keys(root, "", {"case", "solver", "output"});
        cfg.case_id = r.text(root["case"], "case");
        const auto ids = case_ids();
        if (std::find(ids.begin(), ids.end(), *cfg.case_id) == ids.end())
            r.fail(root["case"], "case", "unknown benchmark '" + *cfg.case_id + "'");
        if (root["solver"]) parse_solver(r, root["solver"], cfg);
        if (root["output"]) parse_output(r, root["output"], cfg.output);
        return cfg;
    }
    r.check_keys(root, "", {"domain", "points", "material", "boundary", "source", "initial", "crack", "solver",
                            "output"});
    for (const char* k : {"domain", "points", "boundary", "solver"})
        if (!root[k]) r.fail(root, k, "missing required block");
    int dim = 2;
    cfg.domain = parse_domain(r, root["domain"], dim);
    cfg.problem.dim = dim;
    cfg.points = parse_points(r, root["points"], dim);
    cfg.problem.material = root["material"] ? parse_material(r, root["material"], dim)
                                            : MaterialField::isotropic(1.0, 1.0, 1.0);
    cfg.problem.regions = parse_boundary(r, root["boundary"], dim);
    if (root["source"]) cfg.problem.source = parse_value(r, root["source"], "source");
    if (root["initial"]) {
        const double u0 = r.number(root["initial"], "initial");
        cfg.problem.initial = [u0](const Point&) { return u0; };
    }
    if (const auto crack = root["crack"]) {
        if (!crack.IsSequence()) r.fail(crack, "crack", "expected a list of segments or polygons");
        CrackSpec spec;
        for (const auto& prim : crack) {
            auto pts = r.points(prim, "crack", dim);
            if (static_cast<int>(pts.size()) < dim) r.fail(prim, "crack", "primitive has too few vertices");
            spec.primitives.push_back(std::move(pts));
        }
        cfg.problem.crack = spec;
    }
    parse_solver(r, root["solver"], cfg);
    if (root["output"]) parse_output(r, root["output"], cfg.output);
    return cfg;
}

PointCloud lattice(const ConvexDomain& domain, const std::vector<int>& counts, bool cell_centered) {
    const int dim = domain.dim();
    Point lo = domain.vertices().front(), hi = lo;
    for (const auto& v : domain.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double tol = 1e-9 * domain.diameter();
    PointCloud pc;
    pc.dim = dim;
    const int nz = dim == 3 ? counts[2] : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < counts[1]; ++j)
            for (int i = 0; i < counts[0]; ++i) {
                const int idx[3] = {i, j, k};
                Point p = Point::Zero();
                for (int a = 0; a < dim; ++a) {
                    const double n = counts[static_cast<std::size_t>(a)];
                    p[a] = cell_centered ? lo[a] + (hi[a] - lo[a]) * (idx[a] + 0.5) / n
                                         : lo[a] + (hi[a] - lo[a]) * idx[a] / (n - 1);
                }
                if (!domain.contains(p, 1e-12)) continue;
                bool on_boundary = false;
                for (const auto& h : domain.half_spaces())
                    on_boundary = on_boundary || std::abs(h.normal.dot(p) - h.offset) <= tol;
                pc.add(p, on_boundary);
            }
    return pc;
}

}  // namespace

RunConfig parse_config_string(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream msg;
        msg << source << ':' << e.mark.line + 1 << ": " << e.msg;
        throw SchemaError(msg.str());
    }
    return parse(root, source);
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config_string(ss.str(), path.string());
    if (cfg.points.layout == PointsConfig::Layout::File && cfg.points.file.is_relative())
        cfg.points.file = path.parent_path() / cfg.points.file;
    return cfg;
}

BenchmarkCase build_case(const RunConfig& config, std::optional<std::uint64_t> seed) {
    if (config.case_id) return make_case(*config.case_id, config.overrides);
    BenchmarkCase bc;
    bc.id = std::filesystem::path(config.source).stem().string();
    bc.title = "configured run";
    bc.problem = config.problem;
    bc.domain = config.domain;
    bc.assembly = config.assembly;
    bc.scheme = config.scheme;
    bc.dt = config.dt;
    bc.T = config.T;
    const auto& p = config.points;
    switch (p.layout) {
        case PointsConfig::Layout::File: bc.points = read_points_csv(p.file, config.problem.dim); break;
        case PointsConfig::Layout::Grid: bc.points = lattice(config.domain, p.counts, false); break;
        case PointsConfig::Layout::CellCentered: bc.points = lattice(config.domain, p.counts, true); break;
        case PointsConfig::Layout::Random:
            bc.points = random_points(config.domain, p.total, p.boundary, seed.value_or(p.seed));
            break;
    }
    record_parameters(bc);
    return bc;
}

}  // namespace fpm
