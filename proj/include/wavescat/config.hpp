#pragma once

#include "wavescat/scene.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace wavescat {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class GeometryType { Srr, Cylinders };
enum class DomainQuadrature { Rect, Mesh };

struct ExperimentConfig {
    std::string name = "experiment";

    GeometryType geometry = GeometryType::Srr;
    double radius = 1.0;
    double alpha = 0.0; // SRR only
    double beta = 0.0;  // SRR only
    std::vector<Point2> centers; // cylinders only

    double half_width = 1.0;
    double dx = 0.1;
    DomainQuadrature quadrature = DomainQuadrature::Rect;
    std::string mesh_path; // optional external mesh, replaces the structured mesh
    std::vector<Point2> probes;

    double omega_max = 1.0;
    int n_base = 100;
    bool refine_resonances = true; // extra samples around high-Q resonances

    int n_sol = 10;
    int n_aux = 10;
    int n_ker = 500;
    int n_inc = 10;

    InitialCondition f;
    InitialCondition g;
    std::vector<double> times{0.0};
    bool eta = false;

    double c = 1.0;
    double rho0 = 1.0;

    double search_re_min = 0.1;
    double search_re_max = 1.0;
    double search_im_min = -1.0;
    double search_im_max = 0.0;
    double mesh_tol = 1e-2;

    double normalization_h = 0.01;

    std::string out_dir = "out";
    std::string cache_dir = "cache";

    bool operator==(const ExperimentConfig&) const = default;

    // Throws ConfigError naming the offending key.
    void validate() const;
    Geometry geometry_value() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);
// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& c);

// Hash of every field that affects numerical results (paths excluded).
std::string config_hash(const ExperimentConfig& c);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

} // namespace wavescat
