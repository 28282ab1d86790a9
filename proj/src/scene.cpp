#include "wavescat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wavescat {

Polar to_polar(Point2 origin, Point2 p)
{
    double dx = p.x - origin.x, dy = p.y - origin.y;
    return {std::hypot(dx, dy), std::atan2(dy, dx)};
}

Point2 from_polar(Point2 origin, Polar q)
{
    return {origin.x + q.r * std::cos(q.theta), origin.y + q.r * std::sin(q.theta)};
}

void SrrGeometry::validate() const
{
    if (!(a > 0.0))
        throw std::invalid_argument("srr: radius must be positive");
    if (!(alpha > 0.0 && alpha < std::numbers::pi))
        throw std::invalid_argument("srr: half opening angle must lie in (0, pi)");
}

void CylinderArray::validate() const
{
    if (!(a > 0.0))
        throw std::invalid_argument("cylinders: radius must be positive");
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            double d = std::hypot(centers[i].x - centers[j].x, centers[i].y - centers[j].y);
            if (d <= 2.0 * a)
                throw std::invalid_argument("cylinders " + std::to_string(i) + " and " +
                                            std::to_string(j) + " overlap");
        }
}

Polar CylinderArray::from_origin(std::size_t l) const
{
    return to_polar({0.0, 0.0}, centers.at(l));
}

Polar CylinderArray::between(std::size_t j, std::size_t l) const
{
    return to_polar(centers.at(j), centers.at(l));
}

int CylinderArray::inside(Point2 p, double tol) const
{
    for (std::size_t j = 0; j < centers.size(); ++j)
        if (std::hypot(p.x - centers[j].x, p.y - centers[j].y) < a - tol)
            return static_cast<int>(j);
    return -1;
}

double CylinderArray::enclosing_radius() const
{
    double b = 0.0;
    for (std::size_t l = 0; l < centers.size(); ++l)
        b = std::max(b, from_origin(l).r + a);
    return b;
}

std::string describe(const Geometry& g)
{
    std::ostringstream os;
    os.precision(17);
    if (const auto* s = std::get_if<SrrGeometry>(&g)) {
        os << "srr a=" << s->a << " alpha=" << s->alpha << " beta=" << s->beta;
    } else {
        const auto& c = std::get<CylinderArray>(g);
        os << "cylinders a=" << c.a;
        for (const auto& p : c.centers)
            os << " (" << p.x << "," << p.y << ")";
    }
    return os.str();
}

double SpatialQuadrature::total_weight() const
{
    double s = 0.0;
    for (double w : weights)
        s += w;
    return s;
}

namespace {

// Distance from point c to the axis-aligned rectangle [x0,x1]x[y0,y1].
double rect_distance(Point2 c, double x0, double x1, double y0, double y1)
{
    double dx = std::max({x0 - c.x, 0.0, c.x - x1});
    double dy = std::max({y0 - c.y, 0.0, c.y - y1});
    return std::hypot(dx, dy);
}

} // namespace

SpatialQuadrature rect_quadrature(double half_width, double dx, double dy, const Geometry& geom)
{
    if (!(dx > 0.0) || !(dy > 0.0) || !(half_width > 0.0))
        throw std::invalid_argument("rect_quadrature: spacings and half width must be positive");
    int nx = static_cast<int>(std::llround(2.0 * half_width / dx));
    int ny = static_cast<int>(std::llround(2.0 * half_width / dy));
    if (std::abs(nx * dx - 2.0 * half_width) > 1e-9 * half_width ||
        std::abs(ny * dy - 2.0 * half_width) > 1e-9 * half_width)
        throw std::invalid_argument("rect_quadrature: spacing must divide the domain width");
    const auto* cyl = std::get_if<CylinderArray>(&geom);
    SpatialQuadrature q;
    q.kind = QuadratureKind::RectMidpoint;
    for (int j = 0; j < ny; ++j) {
        double y0 = -half_width + j * dy, y1 = y0 + dy;
        for (int i = 0; i < nx; ++i) {
            double x0 = -half_width + i * dx, x1 = x0 + dx;
            bool keep = true;
            if (cyl)
                for (const auto& c : cyl->centers)
                    if (rect_distance(c, x0, x1, y0, y1) < cyl->a) {
                        keep = false;
                        break;
                    }
            if (!keep)
                continue;
            q.points.push_back({0.5 * (x0 + x1), 0.5 * (y0 + y1)});
            q.weights.push_back(dx * dy);
        }
    }
    return q;
}

SpatialQuadrature tri_quadrature(const TriMesh& mesh)
{
    SpatialQuadrature q;
    q.kind = QuadratureKind::TriCorner;
    q.points = mesh.vertices;
    q.weights.assign(mesh.vertices.size(), 0.0);
    const int nv = static_cast<int>(mesh.vertices.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= nv)
                throw std::invalid_argument("tri_quadrature: triangle " + std::to_string(t) +
                                            " references a missing vertex");
        const Point2& a = mesh.vertices[tri[0]];
        const Point2& b = mesh.vertices[tri[1]];
        const Point2& c = mesh.vertices[tri[2]];
        double area = 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
        if (!(area > 0.0))
            throw std::invalid_argument("tri_quadrature: degenerate triangle " + std::to_string(t));
        for (int v : tri)
            q.weights[v] += area / 3.0;
    }
    // Vertices not used by any triangle carry no weight; drop them.
    SpatialQuadrature out;
    out.kind = QuadratureKind::TriCorner;
    for (int v = 0; v < nv; ++v)
        if (q.weights[v] > 0.0) {
            out.points.push_back(q.points[v]);
            out.weights.push_back(q.weights[v]);
        }
    return out;
}

TriMesh read_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open mesh file " + path);
    TriMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#')
            continue;
        if (tag == "v") {
            Point2 p;
            if (!(ls >> p.x >> p.y))
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad vertex");
            mesh.vertices.push_back(p);
        } else if (tag == "t") {
            std::array<int, 3> t{};
            if (!(ls >> t[0] >> t[1] >> t[2]))
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad triangle");
            mesh.triangles.push_back(t);
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown record '" + tag + "'");
        }
    }
    return mesh;
}

void write_mesh(const TriMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write mesh file " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices)
        out << "v " << v.x << ' ' << v.y << '\n';
    for (const auto& t : mesh.triangles)
        out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

namespace {

struct LevelSet {
    const MeshRegion& r;

    // Positive inside the meshed region.
    double operator()(Point2 p) const
    {
        double s = std::numeric_limits<double>::infinity();
        if (r.outer_radius > 0.0)
            s = r.outer_radius - std::hypot(p.x, p.y);
        for (const auto& c : r.holes)
            s = std::min(s, std::hypot(p.x - c.x, p.y - c.y) - r.hole_radius);
        return s;
    }
};

Point2 crossing(const LevelSet& f, Point2 a, Point2 b)
{
    // a inside, b outside (or the reverse); bisection keeps the result reproducible.
    double fa = f(a);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        Point2 m{a.x + mid * (b.x - a.x), a.y + mid * (b.y - a.y)};
        if ((f(m) >= 0.0) == (fa >= 0.0))
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

double cross(Point2 o, Point2 a, Point2 b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool in_triangle(Point2 p, Point2 a, Point2 b, Point2 c)
{
    return cross(a, b, p) > 0.0 && cross(b, c, p) > 0.0 && cross(c, a, p) > 0.0;
}

// Ear clipping of a counter-clockwise simple polygon (indices into pts).
void ear_clip(std::vector<int> poly, const std::vector<Point2>& pts, double min_area,
              std::vector<std::array<int, 3>>& out)
{
    while (poly.size() >= 3) {
        bool clipped = false;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            int ia = poly[(i + n - 1) % n], ib = poly[i], ic = poly[(i + 1) % n];
            double c = cross(pts[ia], pts[ib], pts[ic]);
            if (c <= 2.0 * min_area)
                continue;
            bool ear = true;
            for (std::size_t k = 0; k < n && ear; ++k) {
                int v = poly[k];
                if (v == ia || v == ib || v == ic)
                    continue;
                if (in_triangle(pts[v], pts[ia], pts[ib], pts[ic]))
                    ear = false;
            }
            if (!ear)
                continue;
            out.push_back({ia, ib, ic});
            poly.erase(poly.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped)
            break;
    }
}

} // namespace

TriMesh structured_mesh(const MeshRegion& region, double h)
{
    if (!(h > 0.0) || !(region.half_width > 0.0))
        throw std::invalid_argument("structured_mesh: sizes must be positive");
    if (!region.holes.empty() && !(h < region.hole_radius))
        throw std::invalid_argument("structured_mesh: mesh size must be below the hole radius");
    const double L = region.half_width;
    // Cell legs h / sqrt(2) keep the longest triangle edge at h.
    const int n = static_cast<int>(std::ceil(2.0 * L * std::sqrt(2.0) / h - 1e-9));
    const double d = 2.0 * L / n;
    LevelSet f{region};

    auto gid = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<Point2> grid((n + 1) * (n + 1));
    std::vector<double> sval(grid.size());
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            grid[gid(i, j)] = {-L + i * d, -L + j * d};
            sval[gid(i, j)] = f(grid[gid(i, j)]);
        }

    std::vector<Point2> pts = grid;
    std::map<std::pair<int, int>, int> cut;
    auto edge_point = [&](int ga, int gb) {
        auto key = std::minmax(ga, gb);
        auto it = cut.find(key);
        if (it != cut.end())
            return it->second;
        Point2 p = crossing(f, grid[key.first], grid[key.second]);
        int id = static_cast<int>(pts.size());
        pts.push_back(p);
        cut.emplace(key, id);
        return id;
    };

    const double min_area = 1e-10 * d * d;
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int c[4] = {gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1)};
            bool in[4];
            int count = 0;
            for (int k = 0; k < 4; ++k) {
                in[k] = sval[c[k]] >= 0.0;
                count += in[k];
            }
            if (count == 0)
                continue;
            if (count == 4) {
                tris.push_back({c[0], c[1], c[2]});
                tris.push_back({c[0], c[2], c[3]});
                continue;
            }
            std::vector<int> poly;
            for (int k = 0; k < 4; ++k) {
                int a = c[k], b = c[(k + 1) % 4];
                if (in[k])
                    poly.push_back(a);
                if (in[k] != in[(k + 1) % 4])
                    poly.push_back(edge_point(a, b));
            }
            ear_clip(poly, pts, min_area, tris);
        }

    // Compact: keep only referenced vertices, in first-use order of their ids.
    std::vector<int> remap(pts.size(), -1);
    std::vector<int> used;
    for (const auto& t : tris)
        for (int v : t)
            if (remap[v] < 0) {
                remap[v] = 0;
                used.push_back(v);
            }
    std::sort(used.begin(), used.end());
    TriMesh mesh;
    for (std::size_t k = 0; k < used.size(); ++k) {
        remap[used[k]] = static_cast<int>(k);
        mesh.vertices.push_back(pts[used[k]]);
    }
    for (const auto& t : tris)
        mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    return mesh;
}

double q_factor(cplx omega)
{
    return -omega.real() / (2.0 * omega.imag());
}

FrequencyGrid frequency_grid(double omega_max, int n_base, const std::vector<cplx>& resonances)
{
    if (!(omega_max > 0.0) || n_base < 1)
        throw std::invalid_argument("frequency_grid: need omega_max > 0 and n_base >= 1");
    std::vector<double> w;
    const double step = omega_max / n_base;
    for (int l = 0; l < n_base; ++l)
        w.push_back((l + 0.5) * step);
    for (cplx r : resonances) {
        if (!(r.real() > 0.0 && r.real() < omega_max) || !(r.imag() < 0.0))
            continue;
        if (!(q_factor(r) > 25.0))
            continue;
        double lo = r.real() + r.imag(), hi = r.real() - r.imag();
        for (int k = 0; k < 20; ++k) {
            double v = lo + (hi - lo) * k / 19.0;
            if (v > 0.0 && v <= omega_max)
                w.push_back(v);
        }
    }
    std::sort(w.begin(), w.end());
    const double tol = 1e-12 * omega_max;
    std::vector<double> uniq;
    for (double v : w)
        if (uniq.empty() || v - uniq.back() > tol)
            uniq.push_back(v);

    FrequencyGrid g;
    g.omega_max = omega_max;
    g.omegas = uniq;
    const std::size_t n = uniq.size();
    g.widths.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        double left = l == 0 ? 0.0 : 0.5 * (uniq[l - 1] + uniq[l]);
        double right = l + 1 == n ? omega_max : 0.5 * (uniq[l] + uniq[l + 1]);
        g.widths[l] = right - left;
    }
    return g;
}

InitialCondition InitialCondition::gaussian(double s, Point2 c)
{
    InitialCondition ic;
    ic.kind = IcKind::Gaussian;
    ic.decay = s;
    ic.center = c;
    return ic;
}

InitialCondition InitialCondition::dipole(double s, double ky, Point2 c)
{
    InitialCondition ic = gaussian(s, c);
    ic.kind = IcKind::Dipole;
    ic.ky = ky;
    return ic;
}

InitialCondition InitialCondition::quadrupole(double s, double kx, double ky, Point2 c)
{
    InitialCondition ic = gaussian(s, c);
    ic.kind = IcKind::Quadrupole;
    ic.kx = kx;
    ic.ky = ky;
    return ic;
}

std::vector<double> eval_initial(const InitialCondition& ic, const std::vector<Point2>& points)
{
    std::vector<double> out(points.size(), 0.0);
    if (ic.kind == IcKind::Zero)
        return out;
    if (ic.kind == IcKind::Tabulated) {
        if (ic.table.size() != points.size())
            throw std::invalid_argument("tabulated initial condition has " + std::to_string(ic.table.size()) +
                                        " values for " + std::to_string(points.size()) + " points");
        return ic.table;
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
        double dx = points[j].x - ic.center.x, dy = points[j].y - ic.center.y;
        double g = std::exp(-ic.decay * (dx * dx + dy * dy));
        switch (ic.kind) {
        case IcKind::Gaussian:
            out[j] = g;
            break;
        case IcKind::Dipole:
            out[j] = std::sin(ic.ky * dy) * g;
            break;
        case IcKind::Quadrupole:
            out[j] = std::sin(ic.kx * dx) * std::sin(ic.ky * dy) * g;
            break;
        default:
            break;
        }
    }
    return out;
}

} // namespace wavescat
