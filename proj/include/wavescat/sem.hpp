#pragma once

#include "wavescat/cylinders.hpp"
#include "wavescat/linalg.hpp"
#include "wavescat/scene.hpp"
#include "wavescat/srr.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavescat {

struct ComplexRect {
    double re_lo = 0.0;
    double re_hi = 0.0;
    double im_lo = -1.0;
    double im_hi = 0.0;

    bool contains(cplx z) const
    {
        return z.real() > re_lo && z.real() < re_hi && z.imag() > im_lo && z.imag() < im_hi;
    }
    bool empty() const { return !(re_hi > re_lo && im_hi > im_lo); }
};

struct SearchOptions {
    double mesh_tol = 1e-2;   // candidate triangles are refined below this diameter
    double initial_size = 0.25;
    int max_depth = 12;       // subdivision levels below the initial triangles
    double max_phase_step = 0.6;
    int max_edge_depth = 24;
    int workers = 1;
};

struct Candidate {
    cplx omega;
    int winding = 0;
    double diameter = 0.0;
};

struct FlaggedRegion {
    std::array<cplx, 3> vertices;
    std::string reason;
};

struct SearchResult {
    std::vector<Candidate> candidates;
    std::vector<FlaggedRegion> flagged;
    std::size_t evaluations = 0;
};

using AnalyticFn = std::function<LogDet(cplx)>;
using MatrixFn = std::function<Eigen::MatrixXcd(cplx)>;

// Discrete argument principle on an adaptively refined triangulation of the rectangle.
SearchResult find_resonances_global(const AnalyticFn& f, const ComplexRect& region, const SearchOptions& opts = {});

struct Resonance {
    cplx omega;
    double residual = 0.0;
    double q_factor = 0.0;
    int multiplicity = 1;
    Eigen::MatrixXcd null_vectors; // unit columns
};

struct RefineOptions {
    double delta = 1e-7;
    int max_iter = 20;
    double tol = 1e-11;
    double null_tol = 1e-9;
};

class RefinementError : public std::runtime_error {
public:
    RefinementError(const std::string& what, cplx best_omega, double best_residual)
        : std::runtime_error(what), best_omega_(best_omega), best_residual_(best_residual)
    {
    }
    cplx best_omega() const { return best_omega_; }
    double best_residual() const { return best_residual_; }

private:
    cplx best_omega_;
    double best_residual_;
};

// Newton-type iteration on the pencil (M(w), (M(w + delta) - M(w)) / delta).
Resonance refine_resonance(const MatrixFn& m, cplx omega0, const RefineOptions& opts = {});

// Search function and system matrix for one scatterer.
struct ResonanceProblem {
    AnalyticFn search;
    MatrixFn matrix;
};

ResonanceProblem srr_problem(const SrrGeometry& geom, const SrrTruncation& trunc, double omega_max, double c = 1.0);
// One cylinder has M = I; its resonances are those of the Hankel-scaled matrix.
ResonanceProblem cyl_problem(const CylinderArray& geom, int n_sol, double c = 1.0);

struct ResonanceReport {
    std::vector<Resonance> accepted;
    std::vector<FlaggedRegion> flagged;
    std::vector<std::string> warnings;
    std::size_t candidates = 0;
};

// Global search, refinement of every candidate, and deduplication within 1e-8.
ResonanceReport find_resonances(const ResonanceProblem& p, const ComplexRect& region, const SearchOptions& sopts = {},
                                const RefineOptions& ropts = {});

void write_resonance_csv(const std::vector<Resonance>& res, const std::string& path);
std::vector<Resonance> read_resonance_csv(const std::string& path);

struct NormalizationOptions {
    // Include the r = b boundary terms in both the outer and the cylinder inner piece.
    // They cancel in the sum, so the default drops them together.
    bool boundary_terms = false;
    double mesh_h = 0.01;
    int annulus_radial = 24;
    int annulus_angular = 256;
};

struct ResonantMode {
    Resonance resonance;
    Geometry geom;
    double c = 1.0;
    int n_sol = 0;
    int index = 0;              // which null vector
    ExteriorCoeffs exterior;    // Ct_n for r > b
    Eigen::VectorXcd interior;  // SRR: Dt_n; cylinders: stacked C_n^{[l]}
    double b = 0.0;
    cplx normalization = 0.0;

    cplx k() const { return resonance.omega / c; }
};

// One mode per null vector of M(omega_j).
std::vector<ResonantMode> extract_modes(const Resonance& res, const SrrGeometry& geom, const SrrTruncation& trunc,
                                        double c = 1.0);
std::vector<ResonantMode> extract_modes(const Resonance& res, const CylinderArray& geom, int n_sol, double c = 1.0);

std::vector<cplx> mode_field(const ResonantMode& mode, const std::vector<Point2>& points);

cplx normalize_outer(const ExteriorCoeffs& ct, cplx k, double b, bool boundary_term);
// Closed form over the disk r < a for an interior Bessel expansion.
cplx normalize_inner_bessel(const Eigen::VectorXcd& dt, cplx k, double a);
// 2 k^2 times the sum of phi^2 w over the quadrature.
cplx normalize_inner_quadrature(const ResonantMode& mode, const SpatialQuadrature& quad);
// 2 k^2 integral of phi^2 over r0 < r < r1 from the exterior expansion.
cplx annulus_integral(const ResonantMode& mode, double r0, double r1, int n_radial, int n_angular);

// Inner mesh of the cylinder domain inside radius r (holes removed).
SpatialQuadrature cylinder_inner_quadrature(const CylinderArray& geom, double r, double h);

// Total <phi_j, psi_j> with the outer piece taken at mode.b. For cylinders the
// inner piece is the mesh inside r_mesh (default the enclosing radius times 1.05)
// plus the annulus up to b.
cplx mode_normalization(const ResonantMode& mode, const NormalizationOptions& opts = {},
                        const SpatialQuadrature* inner = nullptr, double r_mesh = 0.0);

// (omega_j / c^2) sum (i g + omega_j f) phi_j w divided by the normalization.
// Returns nullopt when |normalization| is below 1e-12 of its scale.
std::optional<cplx> sem_amplitude(const ResonantMode& mode, const std::vector<double>& f, const std::vector<double>& g,
                                  const SpatialQuadrature& quad, const std::vector<cplx>& mode_at_quad);

// 2 Re sum_j a_j phi_j(x) e^{-i omega_j t}; rows follow points, columns follow times.
Eigen::MatrixXd sem_field(const std::vector<ResonantMode>& modes, const std::vector<cplx>& amplitudes,
                          const std::vector<Point2>& points, const std::vector<double>& times);

} // namespace wavescat
