#include <doctest.h>

#include "wavescat/cylinders.hpp"
#include "wavescat/specfun.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace wavescat;
using specfun::CylKind;

namespace {

const CylinderArray kArray{0.33, {{0.5, 0.5}, {-0.5, 0.5}, {0.5, -0.5}, {-0.5, -0.5}}};

cplx J(int n, cplx z)
{
    return specfun::cyl(CylKind::BesselJ, n, z);
}

cplx H(int n, cplx z)
{
    return specfun::cyl(CylKind::Hankel1, n, z);
}

// Gradient of Z_n(k r) e^{i n theta} about `origin`.
std::pair<cplx, cplx> grad_term(CylKind kind, int n, cplx k, Point2 origin, Point2 p)
{
    Polar q = to_polar(origin, p);
    cplx lo = specfun::cyl(kind, n - 1, k * q.r) * std::exp(cplx(0, (n - 1) * q.theta));
    cplx hi = specfun::cyl(kind, n + 1, k * q.r) * std::exp(cplx(0, (n + 1) * q.theta));
    return {0.5 * k * (lo - hi), cplx(0, 0.5) * k * (lo + hi)};
}

} // namespace

TEST_CASE("single cylinder at the origin")
{
    CylinderArray one{1.0, {{0.0, 0.0}}};
    const cplx w(2.3, 0.0);
    auto sys = assemble_cyl(one, w, 12);
    for (int m : {0, 3, -5}) {
        auto F = cyl_forcing(sys, m);
        auto sol = solve_cyl_mode(sys, m);
        for (int n = -12; n <= 12; ++n) {
            cplx jp = n == m ? specfun::cyl_deriv(CylKind::BesselJ, m, w) : cplx(0.0);
            CHECK(std::abs(F(n + 12) - jp) < 1e-15);
            CHECK(std::abs(sol.coeff(0, n) + jp) < 1e-12);
        }
        Point2 p{1.4, -0.9};
        Polar q = to_polar({}, p);
        cplx want = J(m, w * q.r) * std::exp(cplx(0, m * q.theta)) -
                    specfun::cyl_deriv(CylKind::BesselJ, m, w) / specfun::cyl_deriv(CylKind::Hankel1, m, w) *
                        H(m, w * q.r) * std::exp(cplx(0, m * q.theta));
        CHECK(std::abs(eval_cyl_field(sol, one, w, {p})[0] - want) < 1e-12);
        auto ct = exterior_coeffs(sol, one, w);
        for (int n = -12; n <= 12; ++n)
            CHECK(std::abs(ct.at(n) - sol.coeff(0, n) / specfun::cyl_deriv(CylKind::Hankel1, n, w)) < 1e-14);
    }
    CHECK_THROWS_AS(eval_cyl_field(solve_cyl_mode(sys, 0), one, w, {{0.2, 0.1}}), std::invalid_argument);
}

TEST_CASE("zero forcing gives zero coefficients")
{
    auto sys = assemble_cyl(kArray, 3.0, 10);
    Eigen::VectorXcd x = sys.lu->solve(Eigen::VectorXcd::Zero(sys.M.rows()));
    CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("overlapping geometry rejected")
{
    CylinderArray bad{0.6, {{0.5, 0.5}, {-0.5, 0.5}}};
    CHECK_THROWS_AS(assemble_cyl(bad, 1.0, 5), std::invalid_argument);
}

TEST_CASE("square array blocks follow the quarter-turn permutation")
{
    // Rotating by pi/2 maps cylinder 0->1->3->2->0.
    const int perm[4] = {1, 3, 0, 2};
    const int N = 8, S = 2 * N + 1;
    auto sys = assemble_cyl(kArray, cplx(2.5, -0.1), N);
    for (int l = 0; l < 4; ++l)
        for (int j = 0; j < 4; ++j) {
            if (l == j)
                continue;
            for (int nu = -N; nu <= N; ++nu)
                for (int n = -N; n <= N; ++n) {
                    cplx a = sys.M(perm[l] * S + nu + N, perm[j] * S + n + N);
                    cplx b = std::exp(cplx(0, (n - nu) * std::numbers::pi / 2)) * sys.M(l * S + nu + N, j * S + n + N);
                    CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(b)));
                }
        }
}

TEST_CASE("Graf re-expansion of the incident wave")
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ur(0.0, 0.65), ut(-std::numbers::pi, std::numbers::pi);
    const Point2 c{0.5, 0.5};
    Polar c0 = to_polar({}, c);
    const cplx k = 3.7;
    for (int i = 0; i < 20; ++i) {
        Point2 p = from_polar(c, {ur(rng), ut(rng)});
        Polar q = to_polar({}, p), ql = to_polar(c, p);
        for (int m : {0, 2, -3}) {
            cplx direct = J(m, k * q.r) * std::exp(cplx(0, m * q.theta));
            cplx sum = 0.0;
            for (int n = -60; n <= 60; ++n)
                sum += std::exp(cplx(0, (m - n) * c0.theta)) * J(m - n, k * c0.r) * J(n, k * ql.r) *
                       std::exp(cplx(0, n * ql.theta));
            CHECK(std::abs(sum - direct) < 1e-10);
        }
    }
}

TEST_CASE("Neumann condition on every cylinder")
{
    const cplx w = 6.0; // ka = 1.98
    auto sys = assemble_cyl(kArray, w, 30);
    for (int m : {0, 1, -4}) {
        auto sol = solve_cyl_mode(sys, m);
        double worst = 0.0, scale = 0.0;
        for (std::size_t l = 0; l < 4; ++l)
            for (int s = 0; s < 12; ++s) {
                double th = 2 * std::numbers::pi * s / 12;
                Point2 p = from_polar(kArray.centers[l], {kArray.a, th});
                auto [gx, gy] = grad_term(CylKind::BesselJ, m, w, {}, p);
                scale = std::max(scale, std::abs(gx) + std::abs(gy));
                for (std::size_t j = 0; j < 4; ++j)
                    for (int n = -30; n <= 30; ++n) {
                        cplx coef = sol.coeff(j, n) / specfun::cyl_deriv(CylKind::Hankel1, n, w * kArray.a);
                        auto [hx, hy] = grad_term(CylKind::Hankel1, n, w, kArray.centers[j], p);
                        gx += coef * hx;
                        gy += coef * hy;
                    }
                worst = std::max(worst, std::abs(gx * std::cos(th) + gy * std::sin(th)));
            }
        INFO("m=" << m);
        CHECK(worst / scale < 1e-10);
    }
}

TEST_CASE("truncation convergence at the probe points")
{
    CylSolver a(kArray, 30), b(kArray, 40);
    for (double w : {1.0, 5.0, 12.0, 19.5}) {
        auto fa = a.fields(w, {{0, 0}, {1, 0}}, {-3, 0, 2});
        auto fb = b.fields(w, {{0, 0}, {1, 0}}, {-3, 0, 2});
        INFO("omega=" << w);
        CHECK((fa - fb).cwiseAbs().maxCoeff() < 5e-14);
    }
}

TEST_CASE("outgoing far field")
{
    auto sys = assemble_cyl(kArray, 4.0, 30);
    auto sol = solve_cyl_mode(sys, 1);
    for (double th : {0.3, 2.0}) {
        double lo = INFINITY, hi = 0.0;
        for (double r = 50.0; r <= 100.0; r += 2.5) {
            Point2 p = from_polar({}, {r, th});
            Polar q = to_polar({}, p);
            cplx inc = J(1, 4.0 * r) * std::exp(cplx(0, q.theta));
            double v = std::abs(eval_cyl_field(sol, kArray, 4.0, {p})[0] - inc) * std::sqrt(r);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK((hi - lo) / hi < 0.01);
    }
}

TEST_CASE("time reversal and relabelling")
{
    CylSolver s(kArray, 20);
    std::vector<Point2> pts{{0, 0}, {1.2, -0.3}, {-0.1, 1.7}};
    auto pos = s.fields(2.2, pts, {-3});
    auto neg = s.fields(-2.2, pts, {3});
    CHECK((neg - pos.conjugate()).cwiseAbs().maxCoeff() < 1e-12);

    CylinderArray shuffled{0.33, {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}};
    CylSolver t(shuffled, 20);
    auto a = s.fields(2.2, pts, {0, 1});
    auto b = t.fields(2.2, pts, {0, 1});
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exterior coefficients")
{
    const cplx w = 3.3;
    auto sys = assemble_cyl(kArray, w, 30);
    const double b = 1.05 * kArray.enclosing_radius();
    for (int m : {0, 1}) {
        auto sol = solve_cyl_mode(sys, m);
        auto ct = exterior_coeffs(sol, kArray, w);
        std::vector<Point2> ring;
        for (int s = 0; s < 20; ++s)
            ring.push_back(from_polar({}, {b + 0.1, 0.31 * s}));
        auto ext = eval_exterior(ct, w, ring);
        auto full = eval_cyl_field(sol, kArray, w, ring);
        for (std::size_t i = 0; i < ring.size(); ++i) {
            Polar q = to_polar({}, ring[i]);
            cplx sc = full[i] - J(m, w * q.r) * std::exp(cplx(0, m * q.theta));
            CHECK(std::abs(ext[i] - sc) < 1e-8 * std::max(1.0, std::abs(sc)));
        }
        if (m == 0) {
            // A fully symmetric incident wave only excites orders divisible by four.
            double big = ct.values.cwiseAbs().maxCoeff();
            for (int nu = -ct.nmax; nu <= ct.nmax; ++nu)
                if (nu % 4 != 0)
                    CHECK(std::abs(ct.at(nu)) < 1e-12 * big);
        }
        // Flux balance for real frequency.
        double sum = 0.0;
        for (int nu = -ct.nmax; nu <= ct.nmax; ++nu)
            sum += std::norm(ct.at(nu));
        CHECK(std::abs(sum + ct.at(m).real()) < 1e-8);
    }
}

TEST_CASE("free field has no scattered part")
{
    CylSolver s(CylinderArray{0.33, {}}, 10);
    Point2 p{0.7, -1.1};
    Polar q = to_polar({}, p);
    auto f = s.fields(1.5, {p}, {2});
    CHECK(std::abs(f(0, 0) - J(2, 1.5 * q.r) * std::exp(cplx(0, 2 * q.theta))) < 1e-15);
}
