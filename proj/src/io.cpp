#include "fpm/io.hpp"

#include "fpm/errors.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace fpm {

void write_csv(std::ostream& out, const PointCloud& points, const std::vector<double>& times,
               const std::vector<Vector>& states) {
    if (times.size() != states.size()) throw IoError("csv: times and states differ in length");
    const bool three = points.dim == 3;
    out << (three ? "t,id,x,y,z,u\n" : "t,id,x,y,u\n");
    out << std::setprecision(17);
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (static_cast<std::size_t>(states[k].size()) != points.size())
            throw IoError("csv: state size does not match the point count");
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Point& p = points.coords[i];
            out << times[k] << ',' << i << ',' << p.x() << ',' << p.y();
            if (three) out << ',' << p.z();
            out << ',' << states[k](static_cast<Eigen::Index>(i)) << '\n';
        }
    }
}

void write_vtk(std::ostream& out, const Partition& partition, const std::map<std::string, Vector>& cell_data) {
    std::vector<Point> vertices;
    std::vector<std::vector<int>> cells;
    std::vector<int> owner;
    for (std::size_t c = 0; c < partition.cells.size(); ++c) {
        const Cell& cell = partition.cells[c];
        const int base = static_cast<int>(vertices.size());
        vertices.insert(vertices.end(), cell.vertices.begin(), cell.vertices.end());
        if (partition.dim == 2) {
            std::vector<int> poly(cell.vertices.size());
            for (std::size_t k = 0; k < poly.size(); ++k) poly[k] = base + static_cast<int>(k);
            cells.push_back(std::move(poly));
            owner.push_back(static_cast<int>(c));
        } else {
            const int center = static_cast<int>(vertices.size());
            vertices.push_back(cell.centroid);
            for (const auto& facet : cell.facets)
                for (std::size_t k = 1; k + 1 < facet.size(); ++k) {
                    cells.push_back({base + facet[0], base + facet[k], base + facet[k + 1], center});
                    owner.push_back(static_cast<int>(c));
                }
        }
    }
    for (const auto& [name, values] : cell_data)
        if (static_cast<std::size_t>(values.size()) != partition.cells.size())
            throw IoError("vtk: cell data '" + name + "' does not match the cell count");

    out << "# vtk DataFile Version 3.0\nfpm partition\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << std::setprecision(17);
    out << "POINTS " << vertices.size() << " double\n";
    for (const auto& v : vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    std::size_t entries = 0;
    for (const auto& c : cells) entries += c.size() + 1;
    out << "CELLS " << cells.size() << ' ' << entries << '\n';
    for (const auto& c : cells) {
        out << c.size();
        for (int v : c) out << ' ' << v;
        out << '\n';
    }
    out << "CELL_TYPES " << cells.size() << '\n';
    for (std::size_t k = 0; k < cells.size(); ++k) out << (partition.dim == 2 ? 7 : 10) << '\n';
    out << "CELL_DATA " << cells.size() << '\n';
    out << "SCALARS point_id int 1\nLOOKUP_TABLE default\n";
    for (int o : owner) out << o << '\n';
    for (const auto& [name, values] : cell_data) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int o : owner) out << values(o) << '\n';
    }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& A) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
    out << std::setprecision(17);
    for (Eigen::Index c = 0; c < A.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(A, c); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

PointCloud read_points_csv(const std::filesystem::path& path, int dim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open point file '" + path.string() + "'");
    PointCloud pc;
    pc.dim = dim;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string field;
        bool numeric = true;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(field, &used));
                if (field.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric && lineno == 1) continue;
        if (!numeric || values.size() != static_cast<std::size_t>(dim + 1)) {
            std::ostringstream msg;
            msg << path.string() << ':' << lineno << ": expected " << dim + 1 << " numeric columns";
            throw IoError(msg.str());
        }
        Point p = Point::Zero();
        for (int a = 0; a < dim; ++a) p[a] = values[static_cast<std::size_t>(a)];
        pc.add(p, values.back() != 0.0);
    }
    if (pc.size() == 0) throw IoError("point file '" + path.string() + "' contains no points");
    return pc;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

}  // namespace fpm
