#pragma once

#include "wavescat/linalg.hpp"
#include "wavescat/scene.hpp"
#include "wavescat/solver.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace wavescat {

struct SrrTruncation {
    int n_sol = 60;
    int n_aux = 30;
    int n_ker = 2500;

    void validate() const;
};

// Frequency-independent part of the Galerkin system: calU(p, n) = i^{-(p-1)} pi J_{p-1}(n alpha),
// rows p = 1..n_aux, columns n = -n_ker..n_ker.
struct SrrBasis {
    SrrGeometry geom;
    SrrTruncation trunc;
    std::shared_ptr<const Eigen::MatrixXcd> calU;

    cplx U(int p, int n) const { return (*calU)(p - 1, n + trunc.n_ker); }
};

std::shared_ptr<const SrrBasis> srr_basis(const SrrGeometry& geom, const SrrTruncation& trunc);

struct SrrSystem {
    std::shared_ptr<const SrrBasis> basis;
    cplx omega;
    cplx k;
    cplx ka;
    Eigen::VectorXcd kernel; // kernel_K(n, ka) for n = 0..n_ker
    Eigen::MatrixXcd M;      // calU diag(kernel) calU^H
    std::shared_ptr<const DenseLu> lu;
};

// With factor = false the LU is left empty (matrix only).
SrrSystem assemble_srr(const SrrGeometry& geom, cplx omega, const SrrTruncation& trunc, double c = 1.0,
                       bool factor = true);

struct SrrSolution {
    int m = 0;
    Eigen::VectorXcd B; // p = 1..n_aux
    Eigen::VectorXcd C; // n = -n_sol..n_sol
    Eigen::VectorXcd D;
};

// Throws SingularSystemError if M is numerically singular.
SrrSolution solve_srr_mode(const SrrSystem& sys, int m);
std::vector<SrrSolution> solve_srr_modes(const SrrSystem& sys, const std::vector<int>& orders);

// Coefficients D from auxiliary coefficients B (incident order m, or no incident wave if m is empty).
Eigen::VectorXcd srr_recover_D(const SrrSystem& sys, const Eigen::VectorXcd& B);

std::vector<cplx> eval_srr_field(const SrrSolution& sol, const SrrGeometry& geom, cplx omega,
                                 const std::vector<Point2>& points, double c = 1.0);

LogDet det_srr(const SrrGeometry& geom, cplx omega, const SrrTruncation& trunc, double c = 1.0);

// det M times prod_{|n| <= n_d} pi ka J_n'(ka) H_n'(ka): removes the poles of the
// kernel factors so that the result is analytic in the lower half plane near the real axis.
LogDet srr_search_det(const SrrGeometry& geom, cplx omega, const SrrTruncation& trunc, int n_deflate,
                      double c = 1.0);

// Number of kernel factors deflated for a search reaching |ka| = ka_max.
int srr_deflation_order(double ka_max);

class SrrSolver : public FrequencySolver {
public:
    SrrSolver(SrrGeometry geom, SrrTruncation trunc, double c = 1.0);
    Eigen::MatrixXcd fields(cplx omega, const std::vector<Point2>& points,
                            const std::vector<int>& orders) const override;
    std::string fingerprint() const override;
    Eigen::MatrixXcd matrix(cplx omega) const;

    const SrrGeometry& geometry() const { return geom_; }
    const SrrTruncation& truncation() const { return trunc_; }
    double wave_speed() const { return c_; }

private:
    SrrGeometry geom_;
    SrrTruncation trunc_;
    double c_;
};

// Multipole field sum_n E(n) R_n(k r) e^{i n theta} with R_n = H_n(kr)/H_n'(ka) outside r = a
// and J_n(kr)/J_n'(ka) inside, for coefficient columns ext (r > a) and in (r <= a).
Eigen::MatrixXcd srr_multipole_sum(cplx k, double a, const std::vector<Point2>& points,
                                   const Eigen::MatrixXcd& ext, const Eigen::MatrixXcd& in);

} // namespace wavescat
