#include "wavescat/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wavescat::specfun {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double euler_gamma = 0.57721566490153286061;
const cplx I(0.0, 1.0);

// Rescaling step for the backward recurrence (binary exponent).
constexpr int kRescaleExp = 600;
const double kRescaleAt = std::ldexp(1.0, kRescaleExp);

void require_finite(cplx v, const char* what, int n)
{
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::overflow_error(std::string(what) + ": value not representable at order " +
                                  std::to_string(n));
}

// Zhang & Jin style estimates of the starting order for Miller's algorithm.
double envj(int n, double x)
{
    return 0.5 * std::log10(6.28 * n) - n * std::log10(1.36 * x / n);
}

int secant_order(double a0, double obj, int n0)
{
    double f0 = envj(n0, a0) - obj;
    int n1 = n0 + 5;
    double f1 = envj(n1, a0) - obj;
    int nn = n1;
    for (int it = 0; it < 40; ++it) {
        if (f1 == f0)
            break;
        nn = static_cast<int>(n1 - (n1 - n0) / (1.0 - f0 / f1));
        nn = std::max(nn, 1);
        double f = envj(nn, a0) - obj;
        if (std::abs(nn - n1) < 1)
            break;
        n0 = n1;
        f0 = f1;
        n1 = nn;
        f1 = f;
    }
    return nn;
}

int miller_start(int nmax, double x)
{
    const int mp = 17;
    double hmp = 0.5 * mp;
    double ejn = envj(std::max(nmax, 1), x);
    int n;
    if (ejn <= hmp)
        n = secant_order(x, mp, static_cast<int>(1.1 * x) + 1);
    else
        n = secant_order(x, hmp + ejn, std::max(nmax, 1));
    return std::max(n + 15, nmax + 15);
}

std::vector<cplx> j_series_small(int nmax, cplx z)
{
    std::vector<cplx> out(nmax + 1);
    cplx h = 0.5 * z;
    cplx h2 = -h * h;
    cplx lead = 1.0;
    for (int n = 0; n <= nmax; ++n) {
        if (n > 0)
            lead *= h / static_cast<double>(n);
        cplx term = lead, sum = lead;
        for (int k = 1; k < 12; ++k) {
            term *= h2 / (static_cast<double>(k) * (n + k));
            sum += term;
        }
        out[n] = sum;
    }
    return out;
}

// H^(1)_0, H^(1)_1 by the large-argument expansion.
void hankel01_asymptotic(cplx z, cplx& h0, cplx& h1)
{
    cplx pref = std::sqrt(2.0 / (pi * z));
    for (int nu = 0; nu <= 1; ++nu) {
        double mu = 4.0 * nu * nu;
        cplx term = 1.0, sum = 1.0;
        double last = 1.0;
        for (int k = 1; k < 200; ++k) {
            double odd = 2.0 * k - 1.0;
            term *= I * (mu - odd * odd) / (8.0 * k * z);
            double mag = std::abs(term);
            if (mag > last)
                break;
            sum += term;
            last = mag;
            if (mag < 1e-17 * std::abs(sum))
                break;
        }
        cplx chi = z - (0.5 * nu + 0.25) * pi;
        cplx v = pref * std::exp(I * chi) * sum;
        (nu == 0 ? h0 : h1) = v;
    }
}

// Continued fraction for H^(1)_0' / H^(1)_0, upper half plane.
cplx hankel0_log_deriv(cplx z)
{
    const double tiny = 1e-300;
    const int maxit = 20000;
    // CF: a1 / (b1 + a2 / (b2 + ...)), modified Lentz.
    cplx f = tiny, c = f, d = 0.0;
    for (int k = 1; k <= maxit; ++k) {
        double h = (2.0 * k - 1.0) / 2.0;
        cplx a = h * h;
        cplx b = 2.0 * (z + static_cast<double>(k) * I);
        d = b + a * d;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + a / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        cplx delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16)
            return -1.0 / (2.0 * z) + I + (I / z) * f;
    }
    throw std::runtime_error("hankel continued fraction did not converge");
}

// H^(1)_0, H^(1)_1 for Re z >= 0, z != 0.
void hankel01_right(cplx z, cplx& h0, cplx& h1)
{
    double r = std::abs(z);
    if (r >= 25.0) {
        hankel01_asymptotic(z, h0, h1);
        return;
    }
    if (z.imag() > 0.0 && r >= 2.0) {
        auto j = bessel_j_seq(1, z);
        cplx f = hankel0_log_deriv(z);
        h0 = 2.0 * I / (pi * z * (j[0] * f + j[1]));
        h1 = -f * h0;
        return;
    }
    int nmax = std::max(40, static_cast<int>(2.0 * r) + 40);
    if (nmax % 2 == 0)
        ++nmax;
    auto j = bessel_j_seq(nmax, z);
    cplx ec = std::log(0.5 * z) + euler_gamma;
    cplx s0 = 0.0, s1 = 0.0;
    for (int k = 1; 2 * k + 1 <= nmax; ++k) {
        double sgn = (k % 2) ? -1.0 : 1.0;
        s0 += sgn * j[2 * k] / static_cast<double>(k);
        s1 += sgn * (2.0 * k + 1.0) / (static_cast<double>(k) * (k + 1)) * j[2 * k + 1];
    }
    cplx y0 = (2.0 / pi) * ec * j[0] - (4.0 / pi) * s0;
    cplx y1 = (2.0 / pi) * ((ec - 1.0) * j[1] - j[0] / z - s1);
    h0 = j[0] + I * y0;
    h1 = j[1] + I * y1;
}

void hankel01(cplx z, cplx& h0, cplx& h1)
{
    if (z == cplx(0.0))
        throw std::domain_error("hankel function undefined at z = 0");
    if (z.real() >= 0.0) {
        hankel01_right(z, h0, h1);
        return;
    }
    cplx w = -z;
    if (z.imag() >= 0.0) {
        // H1_n(z) = -(-1)^n H2_n(w),  H2_n(w) = conj(H1_n(conj w))
        cplx a0, a1;
        hankel01_right(std::conj(w), a0, a1);
        h0 = -std::conj(a0);
        h1 = std::conj(a1);
    } else {
        // H1_n(z) = (-1)^n (H1_n(w) + 2 J_n(w))
        cplx a0, a1;
        hankel01_right(w, a0, a1);
        auto j = bessel_j_seq(1, w);
        h0 = a0 + 2.0 * j[0];
        h1 = -(a1 + 2.0 * j[1]);
    }
}

double parity(int n)
{
    return (n % 2 == 0) ? 1.0 : -1.0;
}

// Large-order coefficients v_k(p), stored as (power, coefficient) pairs.
struct Term {
    int power;
    double coeff;
};

const std::vector<std::vector<Term>> kDebyeV = {
    {{0, 1.0}},
    {{3, 7.0 / 24.0}, {1, -3.0 / 8.0}},
    {{6, -455.0 / 1152.0}, {4, 33.0 / 64.0}, {2, -15.0 / 128.0}},
    {{9, 95095.0 / 82944.0}, {7, -6545.0 / 3072.0}, {5, 5577.0 / 5120.0}, {3, -105.0 / 1024.0}},
    {{12, -40415375.0 / 7962624.0},
     {10, 2739737.0 / 221184.0},
     {8, -2448017.0 / 245760.0},
     {6, 114439.0 / 40960.0},
     {4, -4725.0 / 32768.0}},
    {{15, 5763232475.0 / 191102976.0},
     {13, -215656441.0 / 2359296.0},
     {11, 355886245.0 / 3538944.0},
     {9, -280397117.0 / 5898240.0},
     {7, 15602073.0 / 1835008.0},
     {5, -72765.0 / 262144.0}},
    {{18, -6183948445675.0 / 27518828544.0},
     {16, 415138648925.0 / 509607936.0},
     {14, -4775249765.0 / 4194304.0},
     {12, 7176153985.0 / 9437184.0},
     {10, -75861726551.0 / 314572800.0},
     {8, 440748681.0 / 14680064.0},
     {6, -2837835.0 / 4194304.0}},
};

cplx debye_v(int k, cplx p)
{
    cplx s = 0.0;
    for (const auto& t : kDebyeV[k])
        s += t.coeff * std::pow(p, t.power);
    return s;
}

cplx kernel_large_order(int n, cplx x)
{
    double nn = std::abs(n);
    cplx s = std::sqrt(nn * nn - x * x);
    cplx p = nn / s;
    cplx plus = 0.0, minus = 0.0;
    double scale = 1.0;
    for (std::size_t k = 0; k < kDebyeV.size(); ++k) {
        cplx v = debye_v(static_cast<int>(k), p) * scale;
        plus += v;
        minus += (k % 2 ? -1.0 : 1.0) * v;
        scale /= nn;
    }
    cplx jy = s / (pi * x * x) * plus * minus;
    cplx ratio = 0.5 * std::exp(2.0 * (s - nn * std::log((nn + s) / x))) * plus / minus;
    return 2.0 * I / (pi * x * jy * (ratio + I));
}

} // namespace

std::vector<cplx> bessel_j_seq(int nmax, cplx z)
{
    if (nmax < 0)
        throw std::invalid_argument("bessel_j_seq: negative order");
    double x = std::abs(z);
    if (x == 0.0) {
        std::vector<cplx> out(nmax + 1, 0.0);
        out[0] = 1.0;
        return out;
    }
    if (x < 1e-3)
        return j_series_small(nmax, z);

    int start = miller_start(nmax, x);
    std::vector<cplx> val(nmax + 1);
    std::vector<int> ex(nmax + 1);
    // e^{-iz} = J0 + 2 sum (-i)^k J_k for Im z >= 0, e^{iz} = J0 + 2 sum i^k J_k otherwise.
    const bool upper = z.imag() >= 0.0;
    const cplx unit = upper ? -I : I;
    cplx phase_tab[4] = {1.0, unit, unit * unit, unit * unit * unit};

    int e = 0;
    cplx sum = 0.0;
    cplx fk1 = 0.0, fk = 1e-30;
    cplx two_over_z = 2.0 / z;
    for (int k = start; k >= 0; --k) {
        if (k <= nmax) {
            val[k] = fk;
            ex[k] = e;
        }
        sum += (k == 0 ? 1.0 : 2.0) * phase_tab[k % 4] * fk;
        if (k == 0)
            break;
        cplx fm = static_cast<double>(k) * two_over_z * fk - fk1;
        fk1 = fk;
        fk = fm;
        if (std::abs(fk) > kRescaleAt) {
            double s = std::ldexp(1.0, -kRescaleExp);
            fk *= s;
            fk1 *= s;
            sum *= s;
            e += kRescaleExp;
        }
    }
    cplx norm = (upper ? std::exp(-I * z) : std::exp(I * z)) / sum;
    std::vector<cplx> out(nmax + 1);
    for (int k = 0; k <= nmax; ++k) {
        cplx v = val[k] * norm;
        int shift = ex[k] - e;
        out[k] = cplx(std::ldexp(v.real(), shift), std::ldexp(v.imag(), shift));
    }
    return out;
}

std::vector<cplx> hankel1_seq(int nmax, cplx z)
{
    if (nmax < 0)
        throw std::invalid_argument("hankel1_seq: negative order");
    if (z.imag() < 0.0) {
        // Forward recurrence picks up the recessive H2 here; use H1 = 2J - H2 instead.
        auto j = bessel_j_seq(nmax, z);
        auto h = hankel1_seq(nmax, std::conj(z));
        for (int n = 0; n <= nmax; ++n)
            h[n] = 2.0 * j[n] - std::conj(h[n]);
        return h;
    }
    cplx h0, h1;
    hankel01(z, h0, h1);
    std::vector<cplx> out(nmax + 1);
    out[0] = h0;
    if (nmax >= 1)
        out[1] = h1;
    cplx two_over_z = 2.0 / z;
    for (int n = 1; n < nmax; ++n)
        out[n + 1] = static_cast<double>(n) * two_over_z * out[n] - out[n - 1];
    return out;
}

cplx cyl(CylKind kind, int n, cplx z)
{
    int an = std::abs(n);
    double sgn = n < 0 ? parity(an) : 1.0;
    cplx v;
    switch (kind) {
    case CylKind::BesselJ:
        v = bessel_j_seq(an, z)[an];
        break;
    case CylKind::Hankel1:
        v = hankel1_seq(an, z)[an];
        break;
    case CylKind::Hankel2:
        v = std::conj(hankel1_seq(an, std::conj(z))[an]);
        break;
    }
    v *= sgn;
    require_finite(v, "cyl", n);
    return v;
}

cplx cyl_deriv(CylKind kind, int n, cplx z)
{
    int an = std::abs(n);
    double sgn = n < 0 ? parity(an) : 1.0;
    std::vector<cplx> s;
    switch (kind) {
    case CylKind::BesselJ:
        s = bessel_j_seq(an + 1, z);
        break;
    case CylKind::Hankel1:
        s = hankel1_seq(an + 1, z);
        break;
    case CylKind::Hankel2:
        s = hankel1_seq(an + 1, std::conj(z));
        for (auto& v : s)
            v = std::conj(v);
        break;
    }
    cplx d = an == 0 ? -s[1] : 0.5 * (s[an - 1] - s[an + 1]);
    d *= sgn;
    require_finite(d, "cyl_deriv", n);
    return d;
}

int kernel_switch_order(cplx ka)
{
    return std::max(50, static_cast<int>(std::ceil(3.0 * std::abs(ka))));
}

std::vector<cplx> kernel_K_seq(int nmax, cplx ka)
{
    if (ka == cplx(0.0))
        throw std::domain_error("kernel_K undefined at ka = 0");
    if (nmax < 0)
        throw std::invalid_argument("kernel_K_seq: negative order");
    int nsw = kernel_switch_order(ka);
    int ndir = std::min(nmax, nsw);
    auto j = bessel_j_seq(ndir + 1, ka);
    auto h = hankel1_seq(ndir + 1, ka);
    std::vector<cplx> out(nmax + 1);
    for (int n = 0; n <= ndir; ++n) {
        cplx jp = n == 0 ? -j[1] : 0.5 * (j[n - 1] - j[n + 1]);
        cplx hp = n == 0 ? -h[1] : 0.5 * (h[n - 1] - h[n + 1]);
        out[n] = 2.0 * I / (pi * ka * jp * hp);
        require_finite(out[n], "kernel_K", n);
    }
    for (int n = ndir + 1; n <= nmax; ++n) {
        out[n] = kernel_large_order(n, ka);
        require_finite(out[n], "kernel_K", n);
    }
    return out;
}

cplx kernel_K(int n, cplx ka)
{
    int an = std::abs(n);
    if (an > kernel_switch_order(ka)) {
        if (ka == cplx(0.0))
            throw std::domain_error("kernel_K undefined at ka = 0");
        cplx v = kernel_large_order(an, ka);
        require_finite(v, "kernel_K", n);
        return v;
    }
    return kernel_K_seq(an, ka)[an];
}

} // namespace wavescat::specfun
