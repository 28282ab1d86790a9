#pragma once

#include "wavescat/linalg.hpp"
#include "wavescat/scene.hpp"
#include "wavescat/solver.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace wavescat {

struct CylSystem {
    CylinderArray geom;
    cplx omega;
    cplx k;
    cplx ka;
    int n_sol = 0;
    std::vector<cplx> jp; // J_n'(ka), n = 0..n_sol
    std::vector<cplx> hp; // H_n'(ka)
    Eigen::MatrixXcd M;   // unit diagonal blocks, T^{[l,j]} off the diagonal
    std::shared_ptr<const DenseLu> lu;

    int block() const { return 2 * n_sol + 1; }
    cplx jprime(int n) const;
    cplx hprime(int n) const;
};

// With factor = false the LU is left empty (matrix only).
CylSystem assemble_cyl(const CylinderArray& geom, cplx omega, int n_sol, double c = 1.0, bool factor = true);

// Stacked F^{[l]}_n = e^{i(m-n) phi_0l} J_{m-n}(k R_0l) J_n'(ka).
Eigen::VectorXcd cyl_forcing(const CylSystem& sys, int m);

struct CylSolution {
    int m = 0;
    int n_sol = 0;
    Eigen::VectorXcd C; // stacked per cylinder, index l * (2 n_sol + 1) + n + n_sol

    cplx coeff(std::size_t l, int n) const { return C(static_cast<Eigen::Index>(l) * (2 * n_sol + 1) + n + n_sol); }
};

// Throws SingularSystemError if M is numerically singular.
CylSolution solve_cyl_mode(const CylSystem& sys, int m);
std::vector<CylSolution> solve_cyl_modes(const CylSystem& sys, const std::vector<int>& orders);

// sum_j sum_n C_n^{[j]} H_n(k r_j)/H_n'(ka) e^{i n theta_j} for each coefficient column.
// Points strictly inside a cylinder raise std::invalid_argument naming the cylinder.
Eigen::MatrixXcd cyl_scattered_sum(const CylinderArray& geom, cplx k, int n_sol, const std::vector<Point2>& points,
                                   const Eigen::MatrixXcd& coeffs);

std::vector<cplx> eval_cyl_field(const CylSolution& sol, const CylinderArray& geom, cplx omega,
                                 const std::vector<Point2>& points, double c = 1.0);

// Coefficients of sum_nu Ct_nu H_nu(k r) e^{i nu theta}, valid outside the enclosing circle.
struct ExteriorCoeffs {
    int nmax = 0;
    Eigen::VectorXcd values; // nu = -nmax..nmax

    cplx at(int nu) const { return std::abs(nu) > nmax ? cplx(0.0) : values(nu + nmax); }
};

ExteriorCoeffs exterior_coeffs(const Eigen::VectorXcd& stacked, const CylinderArray& geom, cplx omega, int n_sol,
                               double c = 1.0, int margin = 40);
ExteriorCoeffs exterior_coeffs(const CylSolution& sol, const CylinderArray& geom, cplx omega, double c = 1.0,
                               int margin = 40);

// Field of an exterior expansion at points outside the enclosing circle.
std::vector<cplx> eval_exterior(const ExteriorCoeffs& ct, cplx k, const std::vector<Point2>& points);

Eigen::MatrixXcd cyl_matrix(const CylinderArray& geom, cplx omega, int n_sol, double c = 1.0,
                            bool hankel_scaled = false);

LogDet det_cyl(const CylinderArray& geom, cplx omega, int n_sol, double c = 1.0);

// det M times prod_{l,n} (ka)^{|n|+1} H_n'(ka): cancels the poles that the 1/H_n' factors
// put into M, leaving a function whose zeros are the resonances (for one cylinder: the zeros of H_n').
LogDet cyl_search_det(const CylinderArray& geom, cplx omega, int n_sol, double c = 1.0);

class CylSolver : public FrequencySolver {
public:
    CylSolver(CylinderArray geom, int n_sol, double c = 1.0);
    Eigen::MatrixXcd fields(cplx omega, const std::vector<Point2>& points,
                            const std::vector<int>& orders) const override;
    std::string fingerprint() const override;

    const CylinderArray& geometry() const { return geom_; }
    int n_sol() const { return n_sol_; }
    double wave_speed() const { return c_; }

private:
    CylinderArray geom_;
    int n_sol_;
    double c_;
};

} // namespace wavescat
