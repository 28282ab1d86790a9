#include <doctest.h>

#include "wavescat/specfun.hpp"
#include "wavescat/srr.hpp"

#include <cmath>
#include <numbers>

using namespace wavescat;
using specfun::CylKind;

namespace {

const double kPi = std::numbers::pi;
const SrrGeometry kRing{1.0, kPi / 4, kPi};
const SrrTruncation kPreset{60, 30, 2500};

cplx field_at(const SrrSolver& s, cplx omega, Point2 p, int m)
{
    return s.fields(omega, {p}, {m})(0, 0);
}

} // namespace

TEST_CASE("SRR auxiliary matrix entries")
{
    auto b = srr_basis(kRing, kPreset);
    CHECK(std::abs(b->U(1, 0) - kPi) < 1e-15);
    CHECK(std::abs(b->U(2, 0)) == 0.0);
    cplx want = kPi * specfun::cyl(CylKind::BesselJ, 0, kPi / 4);
    CHECK(std::abs(b->U(1, 1) - want) < 1e-14);
    CHECK(std::abs(b->U(3, -7) - b->U(3, 7)) < 1e-15);
    CHECK(std::abs(b->U(4, -7) + b->U(4, 7)) < 1e-15);
}

TEST_CASE("SRR matrix structure")
{
    auto sys = assemble_srr(kRing, cplx(1.3, -0.2), kPreset);
    double scale = sys.M.cwiseAbs().maxCoeff();
    CHECK((sys.M - sys.M.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
    // Odd and even auxiliary indices decouple except through n = 0.
    double cross = 0.0;
    for (int p = 0; p < 30; ++p)
        for (int q = 0; q < 30; ++q)
            if ((p + q) % 2)
                cross = std::max(cross, std::abs(sys.M(p, q)));
    CHECK(cross < 1e-12 * scale);
}

TEST_CASE("SRR determinant conjugation symmetry")
{
    for (cplx w : {cplx(1.3, 0.2), cplx(0.7, 0.0), cplx(4.1, 0.5)}) {
        LogDet a = det_srr(kRing, w, {20, 10, 600});
        LogDet b = det_srr(kRing, -std::conj(w), {20, 10, 600});
        INFO("omega=" << w);
        CHECK(std::abs(a.log_abs - b.log_abs) < 1e-10 * std::max(1.0, std::abs(a.log_abs)));
        CHECK(std::abs(a.phase - std::conj(b.phase)) < 1e-9);
    }
}

TEST_CASE("SRR frequency solutions")
{
    SrrSolver s(kRing, kPreset);
    const cplx w = 1.0;

    SUBCASE("truncation convergence at the reference probe points")
    {
        SrrSolver fine(kRing, {120, 60, 5000});
        for (Point2 p : {Point2{0, 0}, Point2{-2, 0}})
            for (int m : {0, 3}) {
                cplx a = field_at(s, w, p, m), b = field_at(fine, w, p, m);
                INFO("m=" << m << " point " << p.x << "," << p.y << " " << a << " vs " << b);
                CHECK(std::abs(a - b) < 1e-4);
            }
    }

    SUBCASE("continuity across the opening")
    {
        auto jump = [&](const SrrTruncation& t) {
            auto sys = assemble_srr(kRing, w, t);
            auto sol = solve_srr_mode(sys, 0);
            Point2 in = from_polar({}, {1.0, kPi}), out = from_polar({}, {1.0 + 1e-12, kPi});
            return std::abs(eval_srr_field(sol, kRing, w, {in})[0] - eval_srr_field(sol, kRing, w, {out})[0]);
        };
        double j0 = jump(kPreset);
        double j1 = jump({60, 30, 10000});
        double j2 = jump({120, 60, 5000});
        MESSAGE("jump across the opening " << j0 << " " << j1 << " " << j2);
        CHECK(j0 < 2e-3);
        CHECK(j1 < 1e-3);
        CHECK(j2 < j1);
    }

    SUBCASE("Neumann residual on the ring")
    {
        // k sum_n D_n e^{in theta} is the radial derivative on both sides of r = a.
        auto residual = [&](const SrrTruncation& t) {
            auto sys = assemble_srr(kRing, w, t);
            auto sol = solve_srr_mode(sys, 0);
            const int N = t.n_sol;
            auto dr = [&](double th) {
                cplx acc = 0.0;
                for (int n = -N; n <= N; ++n)
                    acc += sol.D(n + N) * std::exp(cplx(0, n * th));
                return std::abs(acc);
            };
            double sup = 0.0;
            for (int i = 0; i < 1000; ++i)
                sup = std::max(sup, dr(2 * kPi * i / 1000));
            return std::make_pair(dr(kRing.beta + kPi), sup);
        };
        auto [r0, sup0] = residual(kPreset);
        CHECK(r0 / sup0 < 1e-2);
        auto [r1, sup1] = residual({60, 30, 10000});
        CHECK(r1 < r0);
    }

    SUBCASE("flux balance of the exterior coefficients")
    {
        for (double wr : {0.6, 1.9, 4.0})
            for (int m : {0, 2, -1}) {
                auto sys = assemble_srr(kRing, wr, kPreset);
                auto sol = solve_srr_mode(sys, m);
                double sum = 0.0;
                cplx cm = 0.0;
                for (int n = -60; n <= 60; ++n) {
                    cplx c = sol.C(n + 60) / specfun::cyl_deriv(CylKind::Hankel1, n, wr);
                    sum += std::norm(c);
                    if (n == m)
                        cm = c;
                }
                INFO("omega=" << wr << " m=" << m);
                CHECK(std::abs(sum + cm.real()) < 1e-8);
            }
    }

    SUBCASE("time reversal")
    {
        for (Point2 p : {Point2{0.3, 0.2}, Point2{-2.0, 0.5}, Point2{1.5, -1.5}}) {
            cplx a = field_at(s, -w, p, 2);
            cplx b = std::conj(field_at(s, w, p, -2));
            CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(b)));
        }
    }

    SUBCASE("rotation covariance")
    {
        SrrGeometry rot{1.0, kPi / 4, 0.0};
        SrrSolver s0(rot, kPreset);
        for (Point2 p : {Point2{0.3, 0.2}, Point2{-2.0, 0.5}, Point2{0.0, 1.5}})
            for (int m : {0, 1, -2}) {
                Polar q = to_polar({}, p);
                Point2 back = from_polar({}, {q.r, q.theta - kPi});
                cplx a = field_at(s, w, p, m);
                cplx b = std::exp(cplx(0, m * kPi)) * field_at(s0, w, back, m);
                CHECK(std::abs(a - b) < 1e-10);
            }
    }

    SUBCASE("incident wave alone when coefficients vanish")
    {
        SrrSolution z;
        z.m = 2;
        z.C = Eigen::VectorXcd::Zero(121);
        z.D = z.C;
        Point2 p{1.7, -0.4};
        Polar q = to_polar({}, p);
        cplx want = specfun::cyl(CylKind::BesselJ, 2, q.r) * std::exp(cplx(0, 2 * q.theta));
        CHECK(std::abs(eval_srr_field(z, kRing, w, {p})[0] - want) < 1e-15);
    }
}

TEST_CASE("SRR scattering vanishes as the ring opens")
{
    double prev = INFINITY;
    for (double alpha : {kPi / 4, kPi - 0.3, kPi - 0.03, kPi - 0.003}) {
        auto sys = assemble_srr({1.0, alpha, kPi}, 1.0, {40, 20, 1500});
        auto sol = solve_srr_mode(sys, 0);
        double big = sol.C.cwiseAbs().maxCoeff();
        CHECK(big < prev);
        prev = big;
    }
    CHECK(prev < 1e-3);
}
