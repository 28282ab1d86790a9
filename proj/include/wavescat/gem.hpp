#pragma once

#include "wavescat/scene.hpp"
#include "wavescat/solver.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavescat {

class CacheError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using LogFn = std::function<void(const std::string&)>;

// No scatterer: phi_m = J_m(kr) e^{i m theta}.
class FreeFieldSolver : public FrequencySolver {
public:
    explicit FreeFieldSolver(double c = 1.0) : c_(c) {}
    Eigen::MatrixXcd fields(cplx omega, const std::vector<Point2>& points,
                            const std::vector<int>& orders) const override;
    std::string fingerprint() const override;

private:
    double c_;
};

// Frequency solutions phi_m(x_j, omega_l) on disk, one file per incident order m.
// Points are the quadrature points followed by any extra output points.
class SolutionBank {
public:
    SolutionBank(std::string cache_root, const std::string& solver_fingerprint, const std::vector<Point2>& points,
                 const FrequencyGrid& grid, int n_inc);

    const std::string& key() const { return key_; }
    const std::string& dir() const { return dir_; }
    const std::string& metadata() const { return meta_; }
    int n_inc() const { return n_inc_; }
    std::size_t n_omega() const { return n_omega_; }
    std::size_t n_points() const { return n_points_; }
    std::uintmax_t chunk_bytes() const;

    std::string chunk_path(int m) const;
    bool has_chunk(int m) const;
    // N_omega x N_points block; throws CacheError on a bad magic, header or checksum.
    Eigen::MatrixXcd read_chunk(int m) const;

private:
    std::string dir_;
    std::string key_;
    std::string meta_;
    int n_inc_;
    std::size_t n_omega_;
    std::size_t n_points_;
};

// Calls sink(l, P) in increasing l with P(points x orders) = fields at omega_l.
void frequency_sweep(const FrequencySolver& solver, const std::vector<Point2>& points, const FrequencyGrid& grid,
                     const std::vector<int>& orders, int workers,
                     const std::function<void(std::size_t, const Eigen::MatrixXcd&)>& sink);

// Computes every missing chunk; completed chunks are kept, so an interrupted build resumes.
SolutionBank build_bank(const FrequencySolver& solver, const std::vector<Point2>& points, const FrequencyGrid& grid,
                        int n_inc, const std::string& cache_root, int workers, const LogFn& log = {});

struct InitialData {
    std::vector<double> f;
    std::vector<double> g;
};

struct SpectralAmplitudes {
    int n_inc = 0;
    std::vector<double> omegas;
    std::vector<double> widths;
    Eigen::MatrixXcd A; // rows omega_l, columns m = -n_inc..n_inc

    cplx at(int m, std::size_t l) const { return A(static_cast<Eigen::Index>(l), m + n_inc); }
};

// A_m(omega_l) = 1/(4 pi c^2) sum_j (i g_j + omega_l f_j) conj(phi(l, j)) w_j over the first
// quad.size() columns of phi.
Eigen::VectorXcd chunk_amplitudes(const Eigen::MatrixXcd& phi, const std::vector<double>& omegas,
                                  const SpatialQuadrature& quad, const InitialData& ic, double c);

struct FieldSnapshots {
    std::vector<double> times;
    Eigen::MatrixXd phi; // points x times
    Eigen::MatrixXd eta; // empty unless requested
};

// Adds 2 Re phi^T W E_t A (and the -i omega weighted version for eta) to out.
void accumulate_snapshots(const Eigen::MatrixXcd& phi, const Eigen::VectorXcd& amps, const FrequencyGrid& grid,
                          FieldSnapshots& out);

struct GemResult {
    SpectralAmplitudes amplitudes;
    FieldSnapshots snapshots;
};

// Evolution from a bank: one chunk read at a time, orders summed in increasing m.
std::vector<GemResult> gem_from_bank(const SolutionBank& bank, const FrequencyGrid& grid, const SpatialQuadrature& quad,
                                     const std::vector<InitialData>& ics, double c, const std::vector<double>& times,
                                     bool with_eta = false);

// Same result without a cache: amplitudes and snapshots are accumulated while sweeping omega.
std::vector<GemResult> gem_streaming(const FrequencySolver& solver, const std::vector<Point2>& points,
                                     const FrequencyGrid& grid, int n_inc, const SpatialQuadrature& quad,
                                     const std::vector<InitialData>& ics, double c, const std::vector<double>& times,
                                     int workers, bool with_eta = false);

double reconstruction_error(const Eigen::VectorXd& phi0, const std::vector<double>& f);

// (rho0 / 2) * 2 * sum_m sum_l 4 pi omega_l |A_m(omega_l)|^2 dw_l
double spectral_energy(const SpectralAmplitudes& amps, double rho0 = 1.0);

std::uint32_t crc32_bytes(const void* data, std::size_t n, std::uint32_t seed = 0);
std::uint64_t fnv1a64(const std::string& s);

} // namespace wavescat
