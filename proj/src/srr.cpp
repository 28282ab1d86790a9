#include "wavescat/srr.hpp"

#include "wavescat/specfun.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

namespace wavescat {

using specfun::CylKind;

namespace {

constexpr cplx I(0.0, 1.0);

// Derivatives of a cylinder-function sequence c_0..c_{nmax+1}.
std::vector<cplx> derivs(const std::vector<cplx>& c, int nmax)
{
    std::vector<cplx> d(nmax + 1);
    d[0] = -c[1];
    for (int n = 1; n <= nmax; ++n)
        d[n] = 0.5 * (c[n - 1] - c[n + 1]);
    return d;
}

cplx ipow(int e)
{
    switch (((e % 4) + 4) % 4) {
    case 0:
        return 1.0;
    case 1:
        return I;
    case 2:
        return -1.0;
    default:
        return -I;
    }
}

} // namespace

void SrrTruncation::validate() const
{
    if (n_aux < 1 || n_sol < 1 || n_ker < 1)
        throw std::invalid_argument("srr truncations must be positive");
    if (!(n_aux <= n_sol && n_sol <= n_ker))
        throw std::invalid_argument("srr truncations must satisfy n_aux <= n_sol <= n_ker");
}

std::shared_ptr<const SrrBasis> srr_basis(const SrrGeometry& geom, const SrrTruncation& trunc)
{
    geom.validate();
    trunc.validate();
    static std::mutex mu;
    static std::map<std::tuple<double, int, int>, std::shared_ptr<const Eigen::MatrixXcd>> cache;
    auto b = std::make_shared<SrrBasis>();
    b->geom = geom;
    b->trunc = trunc;
    auto key = std::make_tuple(geom.alpha, trunc.n_aux, trunc.n_ker);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) {
            b->calU = it->second;
            return b;
        }
    }
    const int nk = trunc.n_ker, na = trunc.n_aux;
    auto u = std::make_shared<Eigen::MatrixXcd>(na, 2 * nk + 1);
    for (int n = 0; n <= nk; ++n) {
        auto j = specfun::bessel_j_seq(na - 1, n * geom.alpha);
        for (int p = 1; p <= na; ++p) {
            cplx v = ipow(-(p - 1)) * std::numbers::pi * j[p - 1];
            (*u)(p - 1, nk + n) = v;
            (*u)(p - 1, nk - n) = ((p - 1) % 2 == 0) ? v : -v;
        }
    }
    b->calU = u;
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, u);
    return b;
}

SrrSystem assemble_srr(const SrrGeometry& geom, cplx omega, const SrrTruncation& trunc, double c, bool factor)
{
    if (omega == 0.0)
        throw std::domain_error("assemble_srr: omega must be nonzero");
    SrrSystem s;
    s.basis = srr_basis(geom, trunc);
    s.omega = omega;
    s.k = omega / c;
    s.ka = s.k * geom.a;
    auto kern = specfun::kernel_K_seq(trunc.n_ker, s.ka);
    s.kernel = Eigen::Map<Eigen::VectorXcd>(kern.data(), static_cast<Eigen::Index>(kern.size()));
    const int nk = trunc.n_ker;
    Eigen::VectorXcd full(2 * nk + 1);
    for (int n = -nk; n <= nk; ++n)
        full(n + nk) = s.kernel(std::abs(n));
    const auto& U = *s.basis->calU;
    s.M = (U * full.asDiagonal()) * U.adjoint();
    if (factor)
        s.lu = std::make_shared<DenseLu>(s.M);
    return s;
}

Eigen::VectorXcd srr_recover_D(const SrrSystem& sys, const Eigen::VectorXcd& B)
{
    const auto& b = *sys.basis;
    const int ns = b.trunc.n_sol, na = b.trunc.n_aux;
    Eigen::VectorXcd D(2 * ns + 1);
    for (int n = -ns; n <= ns; ++n) {
        cplx acc = 0.0;
        for (int p = 1; p <= na; ++p)
            acc += std::conj(b.U(p, n)) * B(p - 1);
        D(n + ns) = std::exp(-I * (n * b.geom.beta)) * acc / (2.0 * std::numbers::pi * sys.k);
    }
    return D;
}

std::vector<SrrSolution> solve_srr_modes(const SrrSystem& sys, const std::vector<int>& orders)
{
    const auto& b = *sys.basis;
    const int ns = b.trunc.n_sol, na = b.trunc.n_aux;
    sys.lu->require_regular("srr solve at omega=" + std::to_string(sys.omega.real()) + "+" +
                            std::to_string(sys.omega.imag()) + "i");
    auto h = specfun::hankel1_seq(ns + 1, sys.ka);
    auto j = specfun::bessel_j_seq(ns + 1, sys.ka);
    auto hp = derivs(h, ns);
    auto jp = derivs(j, ns);
    Eigen::MatrixXcd rhs(na, static_cast<Eigen::Index>(orders.size()));
    for (std::size_t col = 0; col < orders.size(); ++col) {
        int m = orders[col];
        if (std::abs(m) > ns)
            throw std::invalid_argument("incident order " + std::to_string(m) + " exceeds n_sol");
        int am = std::abs(m);
        cplx sgn = (m < 0 && am % 2) ? -1.0 : 1.0;
        // K_m J_m' written without J_m' to stay finite at its real zeros.
        cplx kj = 2.0 * I / (std::numbers::pi * sys.ka * sgn * hp[am]);
        for (int q = 1; q <= na; ++q)
            rhs(q - 1, static_cast<Eigen::Index>(col)) =
                2.0 * std::numbers::pi * sys.k * b.U(q, m) * std::exp(I * (m * b.geom.beta)) * kj;
    }
    Eigen::MatrixXcd B = sys.lu->solve(rhs);
    std::vector<SrrSolution> out;
    for (std::size_t col = 0; col < orders.size(); ++col) {
        SrrSolution s;
        s.m = orders[col];
        s.B = B.col(static_cast<Eigen::Index>(col));
        s.D = srr_recover_D(sys, s.B);
        s.C = s.D;
        int am = std::abs(s.m);
        cplx sgn = (s.m < 0 && am % 2) ? -1.0 : 1.0;
        s.C(s.m + ns) -= sgn * jp[am];
        out.push_back(std::move(s));
    }
    return out;
}

SrrSolution solve_srr_mode(const SrrSystem& sys, int m)
{
    return solve_srr_modes(sys, {m}).front();
}

Eigen::MatrixXcd srr_multipole_sum(cplx k, double a, const std::vector<Point2>& points,
                                   const Eigen::MatrixXcd& ext, const Eigen::MatrixXcd& in)
{
    const int N = static_cast<int>((ext.rows() - 1) / 2);
    const cplx ka = k * a;
    auto hp = derivs(specfun::hankel1_seq(N + 1, ka), N);
    auto jp = derivs(specfun::bessel_j_seq(N + 1, ka), N);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(points.size()), ext.cols());

    const std::size_t chunk = 2048;
    for (std::size_t lo = 0; lo < points.size(); lo += chunk) {
        std::size_t hi = std::min(points.size(), lo + chunk);
        std::vector<std::size_t> outer, inner;
        for (std::size_t i = lo; i < hi; ++i)
            (to_polar({}, points[i]).r > a ? outer : inner).push_back(i);
        for (int side = 0; side < 2; ++side) {
            const auto& idx = side == 0 ? outer : inner;
            if (idx.empty())
                continue;
            Eigen::MatrixXcd P(static_cast<Eigen::Index>(idx.size()), 2 * N + 1);
            for (std::size_t r = 0; r < idx.size(); ++r) {
                Polar q = to_polar({}, points[idx[r]]);
                std::vector<cplx> f = side == 0 ? specfun::hankel1_seq(N, k * q.r)
                                                : specfun::bessel_j_seq(N, k * q.r);
                const auto& d = side == 0 ? hp : jp;
                cplx e1 = std::exp(I * q.theta), e = 1.0;
                for (int n = 0; n <= N; ++n) {
                    cplx ratio = d[n] == 0.0 ? 0.0 : f[n] / d[n];
                    if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag()))
                        ratio = 0.0;
                    P(static_cast<Eigen::Index>(r), N + n) = ratio * e;
                    if (n > 0)
                        P(static_cast<Eigen::Index>(r), N - n) = ratio * std::conj(e);
                    e *= e1;
                }
            }
            Eigen::MatrixXcd vals = P * (side == 0 ? ext : in);
            for (std::size_t r = 0; r < idx.size(); ++r)
                out.row(static_cast<Eigen::Index>(idx[r])) = vals.row(static_cast<Eigen::Index>(r));
        }
    }
    return out;
}

std::vector<cplx> eval_srr_field(const SrrSolution& sol, const SrrGeometry& geom, cplx omega,
                                 const std::vector<Point2>& points, double c)
{
    cplx k = omega / c;
    Eigen::MatrixXcd vals = srr_multipole_sum(k, geom.a, points, sol.C, sol.D);
    std::vector<cplx> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Polar q = to_polar({}, points[i]);
        out[i] = vals(static_cast<Eigen::Index>(i), 0);
        if (q.r > geom.a)
            out[i] += specfun::cyl(CylKind::BesselJ, sol.m, k * q.r) * std::exp(I * (sol.m * q.theta));
    }
    return out;
}

LogDet det_srr(const SrrGeometry& geom, cplx omega, const SrrTruncation& trunc, double c)
{
    return log_det(assemble_srr(geom, omega, trunc, c, false).M);
}

int srr_deflation_order(double ka_max)
{
    return std::max(static_cast<int>(std::ceil(ka_max)) + 2, 10);
}

LogDet srr_search_det(const SrrGeometry& geom, cplx omega, const SrrTruncation& trunc, int n_deflate, double c)
{
    SrrSystem s = assemble_srr(geom, omega, trunc, c, false);
    LogDet d = log_det(s.M);
    auto hp = derivs(specfun::hankel1_seq(n_deflate + 1, s.ka), n_deflate);
    auto jp = derivs(specfun::bessel_j_seq(n_deflate + 1, s.ka), n_deflate);
    for (int n = 0; n <= n_deflate; ++n) {
        LogDet f = log_scalar(std::numbers::pi * s.ka * jp[n] * hp[n]);
        d *= f;
        if (n > 0)
            d *= f;
    }
    return d;
}

SrrSolver::SrrSolver(SrrGeometry geom, SrrTruncation trunc, double c) : geom_(geom), trunc_(trunc), c_(c)
{
    geom_.validate();
    trunc_.validate();
}

Eigen::MatrixXcd SrrSolver::matrix(cplx omega) const
{
    return assemble_srr(geom_, omega, trunc_, c_, false).M;
}

Eigen::MatrixXcd SrrSolver::fields(cplx omega, const std::vector<Point2>& points,
                                   const std::vector<int>& orders) const
{
    SrrSystem sys = assemble_srr(geom_, omega, trunc_, c_);
    auto sols = solve_srr_modes(sys, orders);
    const int ns = trunc_.n_sol;
    Eigen::MatrixXcd C(2 * ns + 1, static_cast<Eigen::Index>(orders.size()));
    Eigen::MatrixXcd D(2 * ns + 1, static_cast<Eigen::Index>(orders.size()));
    for (std::size_t col = 0; col < sols.size(); ++col) {
        C.col(static_cast<Eigen::Index>(col)) = sols[col].C;
        D.col(static_cast<Eigen::Index>(col)) = sols[col].D;
    }
    cplx k = omega / c_;
    Eigen::MatrixXcd out = srr_multipole_sum(k, geom_.a, points, C, D);
    int mmax = 0;
    for (int m : orders)
        mmax = std::max(mmax, std::abs(m));
    for (std::size_t i = 0; i < points.size(); ++i) {
        Polar q = to_polar({}, points[i]);
        if (!(q.r > geom_.a))
            continue;
        auto j = specfun::bessel_j_seq(mmax, k * q.r);
        for (std::size_t col = 0; col < orders.size(); ++col) {
            int m = orders[col], am = std::abs(m);
            cplx jm = (m < 0 && am % 2) ? -j[am] : j[am];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) += jm * std::exp(I * (m * q.theta));
        }
    }
    return out;
}

std::string SrrSolver::fingerprint() const
{
    std::ostringstream os;
    os.precision(17);
    os << describe(geom_) << " n_sol=" << trunc_.n_sol << " n_aux=" << trunc_.n_aux << " n_ker=" << trunc_.n_ker
       << " c=" << c_;
    return os.str();
}

} // namespace wavescat
