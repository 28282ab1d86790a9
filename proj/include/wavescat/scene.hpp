#pragma once

#include <array>
#include <complex>
#include <string>
#include <variant>
#include <vector>

namespace wavescat {

using cplx = std::complex<double>;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

struct Polar {
    double r = 0.0;
    double theta = 0.0;
};

Polar to_polar(Point2 origin, Point2 p);
Point2 from_polar(Point2 origin, Polar q);

// Split ring of radius a with an opening of half angle alpha centred on direction beta.
struct SrrGeometry {
    double a = 1.0;
    double alpha = 0.0;
    double beta = 0.0;

    void validate() const;
};

struct CylinderArray {
    double a = 1.0;
    std::vector<Point2> centers;

    void validate() const;
    std::size_t size() const { return centers.size(); }
    // Position of center l seen from the global origin.
    Polar from_origin(std::size_t l) const;
    // Position of center l seen from center j.
    Polar between(std::size_t j, std::size_t l) const;
    // Index of the cylinder containing p (strictly inside), or -1.
    int inside(Point2 p, double tol = 0.0) const;
    // Smallest radius b with every cylinder inside the disk |x| < b.
    double enclosing_radius() const;
};

using Geometry = std::variant<SrrGeometry, CylinderArray>;

std::string describe(const Geometry& g);

enum class QuadratureKind { RectMidpoint, TriCorner };

struct SpatialQuadrature {
    std::vector<Point2> points;
    std::vector<double> weights;
    QuadratureKind kind = QuadratureKind::RectMidpoint;

    std::size_t size() const { return points.size(); }
    double total_weight() const;
};

struct TriMesh {
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles;
};

SpatialQuadrature rect_quadrature(double half_width, double dx, double dy, const Geometry& geom);
SpatialQuadrature tri_quadrature(const TriMesh& mesh);

// Text mesh format: "v x y" per vertex, "t i j k" per triangle (0-based).
TriMesh read_mesh(const std::string& path);
void write_mesh(const TriMesh& mesh, const std::string& path);

// Structured mesh of a square (optionally clipped to a disk) with circular holes.
// Background cells are split in two; cells cut by a boundary are clipped
// against it and re-triangulated.
struct MeshRegion {
    double half_width = 1.0;
    double outer_radius = 0.0; // 0: no clipping disk
    double hole_radius = 0.0;
    std::vector<Point2> holes;
};

TriMesh structured_mesh(const MeshRegion& region, double h);

struct FrequencyGrid {
    std::vector<double> omegas;
    std::vector<double> widths;
    double omega_max = 0.0;

    std::size_t size() const { return omegas.size(); }
};

double q_factor(cplx omega);

FrequencyGrid frequency_grid(double omega_max, int n_base, const std::vector<cplx>& resonances);

enum class IcKind { Zero, Gaussian, Dipole, Quadrupole, Tabulated };

struct InitialCondition {
    IcKind kind = IcKind::Zero;
    Point2 center;
    double decay = 1.0;    // s in exp(-s |x - x0|^2)
    double kx = 0.0;       // quadrupole modulation sin(kx (x - x0))
    double ky = 0.0;       // dipole / quadrupole modulation sin(ky (y - y0))
    std::vector<double> table;

    bool operator==(const InitialCondition&) const = default;

    static InitialCondition gaussian(double s, Point2 c = {});
    static InitialCondition dipole(double s, double ky, Point2 c = {});
    static InitialCondition quadrupole(double s, double kx, double ky, Point2 c = {});
};

std::vector<double> eval_initial(const InitialCondition& ic, const std::vector<Point2>& points);

} // namespace wavescat
