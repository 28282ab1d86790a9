#pragma once

#include <complex>
#include <vector>

namespace wavescat {

using cplx = std::complex<double>;

namespace specfun {

enum class CylKind { BesselJ, Hankel1, Hankel2 };

// Integer-order cylinder function of complex argument.
// Throws std::domain_error for Hankel kinds at z = 0 and std::overflow_error
// when the value is not representable.
cplx cyl(CylKind kind, int n, cplx z);

// Derivative with respect to the argument: (C_{n-1} - C_{n+1}) / 2.
cplx cyl_deriv(CylKind kind, int n, cplx z);

// J_0 .. J_nmax by normalized backward recurrence.
std::vector<cplx> bessel_j_seq(int nmax, cplx z);

// H^(1)_0 .. H^(1)_nmax (forward recurrence from the two lowest orders).
std::vector<cplx> hankel1_seq(int nmax, cplx z);

// 2i / (pi ka J_n'(ka) H^(1)_n'(ka)), stable for large |n|.
cplx kernel_K(int n, cplx ka);

// kernel_K for n = 0 .. nmax in one pass (the kernel is even in n).
std::vector<cplx> kernel_K_seq(int nmax, cplx ka);

// Order above which kernel_K switches to the large-order product expansion.
int kernel_switch_order(cplx ka);

} // namespace specfun
} // namespace wavescat
