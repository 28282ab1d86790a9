#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace wavescat {

using cplx = std::complex<double>;

// Determinant as log|det| plus unit phase, so that neither part over- or underflows.
struct LogDet {
    double log_abs = 0.0;
    cplx phase = 1.0;

    cplx value() const { return phase * std::exp(log_abs); }
    LogDet& operator*=(const LogDet& o)
    {
        log_abs += o.log_abs;
        phase *= o.phase;
        phase /= std::abs(phase);
        return *this;
    }
};

LogDet log_det(const Eigen::MatrixXcd& a);
LogDet log_scalar(cplx z);

class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition)
    {
    }
    double condition() const { return condition_; }

private:
    double condition_;
};

// Dense LU with a reciprocal condition estimate.
class DenseLu {
public:
    explicit DenseLu(const Eigen::MatrixXcd& a);
    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const;
    double rcond() const { return rcond_; }
    double condition() const { return rcond_ > 0.0 ? 1.0 / rcond_ : INFINITY; }
    // Throws SingularSystemError when the estimate is below the threshold.
    void require_regular(const std::string& context, double min_rcond = 1e-14) const;

private:
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    double rcond_ = 0.0;
};

struct EigenPair {
    cplx value;
    Eigen::VectorXcd vector;
};

// Eigenpair of A x = lambda B x with the smallest |lambda|.
EigenPair smallest_generalized_eig(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Right singular vectors whose singular values lie below rel_tol * sigma_max.
Eigen::MatrixXcd null_vectors(const Eigen::MatrixXcd& a, double rel_tol, Eigen::VectorXd* singular = nullptr);

} // namespace wavescat
