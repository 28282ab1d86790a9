#include "wavescat/cylinders.hpp"

#include "wavescat/specfun.hpp"

#include <cmath>
#include <sstream>

namespace wavescat {

namespace {

constexpr cplx I(0.0, 1.0);

std::vector<cplx> derivs(const std::vector<cplx>& c, int nmax)
{
    std::vector<cplx> d(nmax + 1);
    d[0] = -c[1];
    for (int n = 1; n <= nmax; ++n)
        d[n] = 0.5 * (c[n - 1] - c[n + 1]);
    return d;
}

// Value of order n from a sequence of orders 0..N, using the (-1)^n reflection.
cplx signed_order(const std::vector<cplx>& seq, int n)
{
    int an = std::abs(n);
    return (n < 0 && (an % 2)) ? -seq[an] : seq[an];
}

} // namespace

cplx CylSystem::jprime(int n) const
{
    return signed_order(jp, n);
}

cplx CylSystem::hprime(int n) const
{
    return signed_order(hp, n);
}

CylSystem assemble_cyl(const CylinderArray& geom, cplx omega, int n_sol, double c, bool factor)
{
    if (omega == 0.0)
        throw std::domain_error("assemble_cyl: omega must be nonzero");
    if (n_sol < 0)
        throw std::invalid_argument("assemble_cyl: n_sol must be non-negative");
    geom.validate();
    CylSystem s;
    s.geom = geom;
    s.omega = omega;
    s.k = omega / c;
    s.ka = s.k * geom.a;
    s.n_sol = n_sol;
    s.jp = derivs(specfun::bessel_j_seq(n_sol + 1, s.ka), n_sol);
    s.hp = derivs(specfun::hankel1_seq(n_sol + 1, s.ka), n_sol);
    const int S = s.block();
    const int N = static_cast<int>(geom.size());
    s.M = Eigen::MatrixXcd::Identity(N * S, N * S);
    for (int l = 0; l < N; ++l)
        for (int j = 0; j < N; ++j) {
            if (l == j)
                continue;
            Polar rel = geom.between(static_cast<std::size_t>(j), static_cast<std::size_t>(l));
            auto h = specfun::hankel1_seq(2 * n_sol, s.k * rel.r);
            for (int nu = -n_sol; nu <= n_sol; ++nu)
                for (int n = -n_sol; n <= n_sol; ++n) {
                    int d = n - nu;
                    s.M(l * S + nu + n_sol, j * S + n + n_sol) =
                        std::exp(I * (d * rel.theta)) * signed_order(h, d) * s.jprime(nu) / s.hprime(n);
                }
        }
    if (N > 0 && factor)
        s.lu = std::make_shared<DenseLu>(s.M);
    return s;
}

Eigen::VectorXcd cyl_forcing(const CylSystem& sys, int m)
{
    const int S = sys.block(), N = static_cast<int>(sys.geom.size()), ns = sys.n_sol;
    Eigen::VectorXcd F(N * S);
    for (int l = 0; l < N; ++l) {
        Polar p = sys.geom.from_origin(static_cast<std::size_t>(l));
        auto j = specfun::bessel_j_seq(std::abs(m) + ns, sys.k * p.r);
        for (int n = -ns; n <= ns; ++n) {
            int d = m - n;
            F(l * S + n + ns) = std::exp(I * (d * p.theta)) * signed_order(j, d) * sys.jprime(n);
        }
    }
    return F;
}

std::vector<CylSolution> solve_cyl_modes(const CylSystem& sys, const std::vector<int>& orders)
{
    const int S = sys.block(), N = static_cast<int>(sys.geom.size());
    std::vector<CylSolution> out;
    Eigen::MatrixXcd rhs(N * S, static_cast<Eigen::Index>(orders.size()));
    for (std::size_t col = 0; col < orders.size(); ++col) {
        if (std::abs(orders[col]) > sys.n_sol)
            throw std::invalid_argument("incident order " + std::to_string(orders[col]) + " exceeds n_sol");
        rhs.col(static_cast<Eigen::Index>(col)) = -cyl_forcing(sys, orders[col]);
    }
    Eigen::MatrixXcd X = rhs;
    if (N > 0) {
        sys.lu->require_regular("cylinder solve at omega=" + std::to_string(sys.omega.real()) + "+" +
                                std::to_string(sys.omega.imag()) + "i");
        X = sys.lu->solve(rhs);
    }
    for (std::size_t col = 0; col < orders.size(); ++col) {
        CylSolution s;
        s.m = orders[col];
        s.n_sol = sys.n_sol;
        s.C = X.col(static_cast<Eigen::Index>(col));
        out.push_back(std::move(s));
    }
    return out;
}

CylSolution solve_cyl_mode(const CylSystem& sys, int m)
{
    return solve_cyl_modes(sys, {m}).front();
}

Eigen::MatrixXcd cyl_scattered_sum(const CylinderArray& geom, cplx k, int n_sol, const std::vector<Point2>& points,
                                   const Eigen::MatrixXcd& coeffs)
{
    const int S = 2 * n_sol + 1, N = static_cast<int>(geom.size());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(points.size()), coeffs.cols());
    if (N == 0)
        return out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        int in = geom.inside(points[i], 1e-12 * geom.a);
        if (in >= 0)
            throw std::invalid_argument("point (" + std::to_string(points[i].x) + ", " +
                                        std::to_string(points[i].y) + ") lies inside cylinder " +
                                        std::to_string(in));
    }
    auto hp = derivs(specfun::hankel1_seq(n_sol + 1, k * geom.a), n_sol);
    const std::size_t chunk = 2048;
    for (std::size_t lo = 0; lo < points.size(); lo += chunk) {
        std::size_t hi = std::min(points.size(), lo + chunk);
        Eigen::MatrixXcd P(static_cast<Eigen::Index>(hi - lo), N * S);
        for (std::size_t i = lo; i < hi; ++i)
            for (int j = 0; j < N; ++j) {
                Polar q = to_polar(geom.centers[static_cast<std::size_t>(j)], points[i]);
                auto h = specfun::hankel1_seq(n_sol, k * q.r);
                cplx e1 = std::exp(I * q.theta), e = 1.0;
                auto r = static_cast<Eigen::Index>(i - lo);
                for (int n = 0; n <= n_sol; ++n) {
                    cplx ratio = h[n] / hp[n];
                    P(r, j * S + n_sol + n) = ratio * e;
                    if (n > 0)
                        P(r, j * S + n_sol - n) = ratio * std::conj(e);
                    e *= e1;
                }
            }
        out.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) = P * coeffs;
    }
    return out;
}

std::vector<cplx> eval_cyl_field(const CylSolution& sol, const CylinderArray& geom, cplx omega,
                                 const std::vector<Point2>& points, double c)
{
    cplx k = omega / c;
    Eigen::MatrixXcd sc = cyl_scattered_sum(geom, k, sol.n_sol, points, sol.C);
    std::vector<cplx> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Polar q = to_polar({}, points[i]);
        out[i] = specfun::cyl(specfun::CylKind::BesselJ, sol.m, k * q.r) * std::exp(I * (sol.m * q.theta)) +
                 sc(static_cast<Eigen::Index>(i), 0);
    }
    return out;
}

ExteriorCoeffs exterior_coeffs(const Eigen::VectorXcd& stacked, const CylinderArray& geom, cplx omega, int n_sol,
                               double c, int margin)
{
    const int S = 2 * n_sol + 1, N = static_cast<int>(geom.size());
    const int nmax = n_sol + margin;
    cplx k = omega / c;
    auto hp = derivs(specfun::hankel1_seq(n_sol + 1, k * geom.a), n_sol);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * nmax + 1);
    for (int l = 0; l < N; ++l) {
        Polar p = geom.from_origin(static_cast<std::size_t>(l));
        auto j = specfun::bessel_j_seq(nmax + n_sol, k * p.r);
        for (int nu = -nmax; nu <= nmax; ++nu) {
            cplx acc = 0.0;
            for (int n = -n_sol; n <= n_sol; ++n) {
                int d = n - nu;
                cplx sgn = (std::abs(d) % 2) ? -1.0 : 1.0;
                acc += sgn * std::exp(I * (d * p.theta)) * signed_order(j, d) / signed_order(hp, n) *
                       stacked(l * S + n + n_sol);
            }
            v(nu + nmax) += acc;
        }
    }
    // Trim orders whose terms are negligible at the matching radius.
    const double b = 1.05 * geom.enclosing_radius();
    auto hb = specfun::hankel1_seq(nmax, k * b);
    Eigen::VectorXd term(2 * nmax + 1);
    for (int nu = -nmax; nu <= nmax; ++nu)
        term(nu + nmax) = std::abs(v(nu + nmax) * hb[static_cast<std::size_t>(std::abs(nu))]);
    double big = term.maxCoeff();
    int keep = 0;
    for (int nu = -nmax; nu <= nmax; ++nu)
        if (term(nu + nmax) > 1e-14 * big)
            keep = std::max(keep, std::abs(nu));
    ExteriorCoeffs out;
    out.nmax = keep;
    out.values = v.segment(nmax - keep, 2 * keep + 1);
    return out;
}

ExteriorCoeffs exterior_coeffs(const CylSolution& sol, const CylinderArray& geom, cplx omega, double c, int margin)
{
    return exterior_coeffs(sol.C, geom, omega, sol.n_sol, c, margin);
}

std::vector<cplx> eval_exterior(const ExteriorCoeffs& ct, cplx k, const std::vector<Point2>& points)
{
    std::vector<cplx> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Polar q = to_polar({}, points[i]);
        auto h = specfun::hankel1_seq(ct.nmax, k * q.r);
        cplx acc = 0.0;
        for (int nu = -ct.nmax; nu <= ct.nmax; ++nu)
            acc += ct.at(nu) * signed_order(h, nu) * std::exp(I * (nu * q.theta));
        out[i] = acc;
    }
    return out;
}

Eigen::MatrixXcd cyl_matrix(const CylinderArray& geom, cplx omega, int n_sol, double c, bool hankel_scaled)
{
    CylSystem s = assemble_cyl(geom, omega, n_sol, c, false);
    if (!hankel_scaled)
        return s.M;
    const int S = s.block();
    Eigen::MatrixXcd m = s.M;
    for (Eigen::Index col = 0; col < m.cols(); ++col)
        m.col(col) *= s.hprime(static_cast<int>(col % S) - n_sol);
    return m;
}

LogDet det_cyl(const CylinderArray& geom, cplx omega, int n_sol, double c)
{
    return log_det(assemble_cyl(geom, omega, n_sol, c, false).M);
}

LogDet cyl_search_det(const CylinderArray& geom, cplx omega, int n_sol, double c)
{
    CylSystem s = assemble_cyl(geom, omega, n_sol, c, false);
    LogDet d = log_det(s.M);
    LogDet z = log_scalar(s.ka);
    LogDet per_cylinder;
    for (int n = -n_sol; n <= n_sol; ++n) {
        LogDet f = log_scalar(s.hp[static_cast<std::size_t>(std::abs(n))]);
        f.log_abs += (std::abs(n) + 1) * z.log_abs;
        f.phase *= std::pow(z.phase, std::abs(n) + 1);
        per_cylinder *= f;
    }
    for (std::size_t l = 0; l < geom.size(); ++l)
        d *= per_cylinder;
    return d;
}

CylSolver::CylSolver(CylinderArray geom, int n_sol, double c) : geom_(std::move(geom)), n_sol_(n_sol), c_(c)
{
    geom_.validate();
}

Eigen::MatrixXcd CylSolver::fields(cplx omega, const std::vector<Point2>& points, const std::vector<int>& orders) const
{
    CylSystem sys = assemble_cyl(geom_, omega, n_sol_, c_);
    auto sols = solve_cyl_modes(sys, orders);
    const int S = sys.block();
    Eigen::MatrixXcd C(static_cast<Eigen::Index>(geom_.size()) * S, static_cast<Eigen::Index>(orders.size()));
    for (std::size_t col = 0; col < sols.size(); ++col)
        C.col(static_cast<Eigen::Index>(col)) = sols[col].C;
    cplx k = omega / c_;
    Eigen::MatrixXcd out = cyl_scattered_sum(geom_, k, n_sol_, points, C);
    int mmax = 0;
    for (int m : orders)
        mmax = std::max(mmax, std::abs(m));
    for (std::size_t i = 0; i < points.size(); ++i) {
        Polar q = to_polar({}, points[i]);
        auto j = specfun::bessel_j_seq(mmax, k * q.r);
        for (std::size_t col = 0; col < orders.size(); ++col) {
            int m = orders[col];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) +=
                signed_order(j, m) * std::exp(I * (m * q.theta));
        }
    }
    return out;
}

std::string CylSolver::fingerprint() const
{
    std::ostringstream os;
    os.precision(17);
    os << describe(geom_) << " n_sol=" << n_sol_ << " c=" << c_;
    return os.str();
}

} // namespace wavescat
