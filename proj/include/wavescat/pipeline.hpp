#pragma once

#include "wavescat/config.hpp"
#include "wavescat/gem.hpp"
#include "wavescat/sem.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wavescat {

// Everything derived from a config before any frequency solve.
struct Scene {
    ExperimentConfig config;
    Geometry geom;
    std::unique_ptr<FrequencySolver> solver;
    SpatialQuadrature quad;
    std::vector<Point2> points; // quadrature points, then probes

    std::size_t n_quad() const { return quad.size(); }
    std::size_t n_probes() const { return points.size() - quad.size(); }
};

Scene make_scene(const ExperimentConfig& cfg);

SrrTruncation srr_truncation(const ExperimentConfig& cfg);
ResonanceProblem resonance_problem(const ExperimentConfig& cfg);
// Configured rectangle clipped to Re < omega_max; may be empty.
ComplexRect search_region(const ExperimentConfig& cfg);

// Search results cached under cache_dir by the inputs they depend on.
std::string resonance_key(const ExperimentConfig& cfg);
ResonanceReport search_resonances(const ExperimentConfig& cfg, int workers, const std::string& cache_dir,
                                  const LogFn& log = {});

FrequencyGrid gem_grid(const ExperimentConfig& cfg, const std::vector<Resonance>& resonances);
InitialData initial_data(const ExperimentConfig& cfg, const SpatialQuadrature& quad);

struct ModeAmplitude {
    ResonantMode mode;
    cplx amplitude;
    double peak = 0.0; // 2 |a| max_x |phi_j| over the quadrature
};

struct SemResult {
    std::vector<ModeAmplitude> modes;
    std::vector<std::string> warnings;
    Eigen::MatrixXd phi; // points x times
};

SemResult run_sem(const Scene& scene, const std::vector<Resonance>& resonances, const InitialData& ic,
                  const std::vector<double>& times, int workers);

} // namespace wavescat
