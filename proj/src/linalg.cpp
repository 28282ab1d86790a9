#include "wavescat/linalg.hpp"

#include <cmath>
#include <limits>

namespace wavescat {

LogDet log_scalar(cplx z)
{
    double m = std::abs(z);
    if (m == 0.0)
        return {-std::numeric_limits<double>::infinity(), 1.0};
    return {std::log(m), z / m};
}

LogDet log_det(const Eigen::MatrixXcd& a)
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("log_det: matrix must be square");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const auto& u = lu.matrixLU();
    LogDet d;
    d.phase = static_cast<double>(lu.permutationP().determinant());
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        d *= log_scalar(u(i, i));
    return d;
}

DenseLu::DenseLu(const Eigen::MatrixXcd& a) : lu_(a)
{
    rcond_ = lu_.rcond();
    if (!std::isfinite(rcond_))
        rcond_ = 0.0;
}

Eigen::MatrixXcd DenseLu::solve(const Eigen::MatrixXcd& rhs) const
{
    return lu_.solve(rhs);
}

void DenseLu::require_regular(const std::string& context, double min_rcond) const
{
    if (!(rcond_ >= min_rcond))
        throw SingularSystemError(context + ": matrix is numerically singular (condition estimate " +
                                      std::to_string(condition()) + ")",
                                  condition());
}

EigenPair smallest_generalized_eig(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    // Largest eigenvalue mu of A^{-1} B gives lambda = 1 / mu; B may be singular, A is near singular.
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    Eigen::MatrixXcd c = lu.solve(b);
    if (!c.allFinite())
        return {0.0, null_vectors(a, 0.0).col(0)};
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("generalized eigenvalue iteration did not converge");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(best)))
            best = i;
    cplx mu = es.eigenvalues()(best);
    if (mu == 0.0)
        throw std::runtime_error("generalized eigenvalue problem: pencil has no finite eigenvalue");
    return {1.0 / mu, es.eigenvectors().col(best)};
}

Eigen::MatrixXcd null_vectors(const Eigen::MatrixXcd& a, double rel_tol, Eigen::VectorXd* singular)
{
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (singular)
        *singular = s;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) < rel_tol * s(0))
            ++count;
    if (count == 0)
        count = 1;
    return svd.matrixV().rightCols(count);
}

} // namespace wavescat
