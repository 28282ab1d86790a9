#include "wavescat/pipeline.hpp"

#include "wavescat/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wavescat {

namespace fs = std::filesystem;

namespace {

constexpr cplx I(0.0, 1.0);

std::string g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nlohmann::json report_json(const ResonanceReport& rep, const std::string& key_text)
{
    nlohmann::json j;
    j["key"] = key_text;
    j["candidates"] = rep.candidates;
    j["accepted"] = nlohmann::json::array();
    for (const auto& r : rep.accepted)
        j["accepted"].push_back({r.omega.real(), r.omega.imag(), r.q_factor, r.residual, r.multiplicity});
    j["flagged"] = nlohmann::json::array();
    for (const auto& f : rep.flagged) {
        nlohmann::json v = nlohmann::json::array();
        for (cplx z : f.vertices)
            v.push_back({z.real(), z.imag()});
        j["flagged"].push_back({{"vertices", v}, {"reason", f.reason}});
    }
    j["warnings"] = rep.warnings;
    return j;
}

ResonanceReport report_from_json(const nlohmann::json& j)
{
    ResonanceReport rep;
    rep.candidates = j.at("candidates").get<std::size_t>();
    for (const auto& row : j.at("accepted")) {
        Resonance r;
        r.omega = {row.at(0).get<double>(), row.at(1).get<double>()};
        r.q_factor = row.at(2).get<double>();
        r.residual = row.at(3).get<double>();
        r.multiplicity = row.at(4).get<int>();
        rep.accepted.push_back(r);
    }
    for (const auto& f : j.at("flagged")) {
        FlaggedRegion fr;
        for (std::size_t i = 0; i < 3; ++i)
            fr.vertices[i] = {f.at("vertices").at(i).at(0).get<double>(), f.at("vertices").at(i).at(1).get<double>()};
        fr.reason = f.at("reason").get<std::string>();
        rep.flagged.push_back(fr);
    }
    rep.warnings = j.at("warnings").get<std::vector<std::string>>();
    return rep;
}

std::string resonance_key_text(const ExperimentConfig& cfg)
{
    ComplexRect r = search_region(cfg);
    std::ostringstream os;
    os << "resonances v1 " << describe(cfg.geometry_value()) << " n_sol=" << cfg.n_sol << " c=" << g17(cfg.c)
       << " region=" << g17(r.re_lo) << "," << g17(r.re_hi) << "," << g17(r.im_lo) << "," << g17(r.im_hi)
       << " mesh_tol=" << g17(cfg.mesh_tol);
    if (cfg.geometry == GeometryType::Srr)
        os << " n_aux=" << cfg.n_aux << " n_ker=" << cfg.n_ker << " omega_max=" << g17(cfg.omega_max);
    return os.str();
}

} // namespace

SrrTruncation srr_truncation(const ExperimentConfig& cfg)
{
    SrrTruncation t;
    t.n_sol = cfg.n_sol;
    t.n_aux = cfg.n_aux;
    t.n_ker = cfg.n_ker;
    return t;
}

Scene make_scene(const ExperimentConfig& cfg)
{
    cfg.validate();
    Scene s;
    s.config = cfg;
    s.geom = cfg.geometry_value();
    if (cfg.geometry == GeometryType::Srr)
        s.solver = std::make_unique<SrrSolver>(std::get<SrrGeometry>(s.geom), srr_truncation(cfg), cfg.c);
    else
        s.solver = std::make_unique<CylSolver>(std::get<CylinderArray>(s.geom), cfg.n_sol, cfg.c);

    if (!cfg.mesh_path.empty()) {
        s.quad = tri_quadrature(read_mesh(cfg.mesh_path));
    } else if (cfg.quadrature == DomainQuadrature::Rect) {
        s.quad = rect_quadrature(cfg.half_width, cfg.dx, cfg.dx, s.geom);
    } else {
        const auto& cyl = std::get<CylinderArray>(s.geom);
        s.quad = tri_quadrature(structured_mesh(MeshRegion{cfg.half_width, 0.0, cyl.a, cyl.centers}, cfg.dx));
    }
    if (s.quad.size() == 0)
        throw ConfigError("the domain quadrature has no points");
    s.points = s.quad.points;
    s.points.insert(s.points.end(), cfg.probes.begin(), cfg.probes.end());
    return s;
}

ResonanceProblem resonance_problem(const ExperimentConfig& cfg)
{
    Geometry g = cfg.geometry_value();
    if (cfg.geometry == GeometryType::Srr)
        return srr_problem(std::get<SrrGeometry>(g), srr_truncation(cfg), search_region(cfg).re_hi, cfg.c);
    return cyl_problem(std::get<CylinderArray>(g), cfg.n_sol, cfg.c);
}

ComplexRect search_region(const ExperimentConfig& cfg)
{
    ComplexRect r;
    r.re_lo = std::max(cfg.search_re_min, 0.0);
    r.re_hi = std::min(cfg.search_re_max, cfg.omega_max);
    r.im_lo = cfg.search_im_min;
    r.im_hi = cfg.search_im_max;
    return r;
}

std::string resonance_key(const ExperimentConfig& cfg)
{
    return hex64(fnv1a64(resonance_key_text(cfg)));
}

ResonanceReport search_resonances(const ExperimentConfig& cfg, int workers, const std::string& cache_dir,
                                  const LogFn& log)
{
    const std::string text = resonance_key_text(cfg);
    fs::path path;
    if (!cache_dir.empty()) {
        path = fs::path(cache_dir) / "resonances" / (resonance_key(cfg) + ".json");
        std::ifstream is(path);
        if (is) {
            try {
                nlohmann::json j = nlohmann::json::parse(is);
                if (j.at("key").get<std::string>() == text) {
                    if (log)
                        log("resonances loaded from " + path.string());
                    return report_from_json(j);
                }
            } catch (const nlohmann::json::exception& e) {
                throw CacheError("corrupt resonance cache " + path.string() + ": " + e.what());
            }
        }
    }

    ComplexRect region = search_region(cfg);
    ResonanceReport rep;
    if (!region.empty()) {
        SearchOptions so;
        so.mesh_tol = cfg.mesh_tol;
        so.workers = workers;
        if (log)
            log("searching for resonances in [" + g17(region.re_lo) + ", " + g17(region.re_hi) + "] x [" +
                g17(region.im_lo) + ", " + g17(region.im_hi) + "]");
        rep = find_resonances(resonance_problem(cfg), region, so);
    }
    if (!path.empty()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw CacheError("cannot create " + path.parent_path().string() + ": " + ec.message());
        fs::path tmp = path;
        tmp += ".part";
        {
            std::ofstream os(tmp);
            os << report_json(rep, text).dump(1) << "\n";
            if (!os)
                throw CacheError("cannot write " + tmp.string());
        }
        fs::rename(tmp, path, ec);
        if (ec)
            throw CacheError("cannot write " + path.string() + ": " + ec.message());
    }
    return rep;
}

FrequencyGrid gem_grid(const ExperimentConfig& cfg, const std::vector<Resonance>& resonances)
{
    std::vector<cplx> w;
    if (cfg.refine_resonances)
        for (const auto& r : resonances)
            w.push_back(r.omega);
    return frequency_grid(cfg.omega_max, cfg.n_base, w);
}

InitialData initial_data(const ExperimentConfig& cfg, const SpatialQuadrature& quad)
{
    return {eval_initial(cfg.f, quad.points), eval_initial(cfg.g, quad.points)};
}

SemResult run_sem(const Scene& scene, const std::vector<Resonance>& resonances, const InitialData& ic,
                  const std::vector<double>& times, int workers)
{
    const ExperimentConfig& cfg = scene.config;
    std::vector<ResonantMode> modes;
    for (Resonance r : resonances) {
        r.null_vectors.resize(0, 0); // recomputed at the stored frequency, so cached and fresh runs agree
        std::vector<ResonantMode> ms =
            cfg.geometry == GeometryType::Srr
                ? extract_modes(r, std::get<SrrGeometry>(scene.geom), srr_truncation(cfg), cfg.c)
                : extract_modes(r, std::get<CylinderArray>(scene.geom), cfg.n_sol, cfg.c);
        for (auto& m : ms)
            modes.push_back(std::move(m));
    }

    NormalizationOptions nopts;
    nopts.mesh_h = cfg.normalization_h;
    SpatialQuadrature inner;
    double r_mesh = 0.0;
    if (const auto* cyl = std::get_if<CylinderArray>(&scene.geom)) {
        r_mesh = 1.05 * cyl->enclosing_radius();
        inner = cylinder_inner_quadrature(*cyl, r_mesh, nopts.mesh_h);
    }

    const std::size_t nq = scene.n_quad();
    std::vector<std::vector<cplx>> fields(modes.size());
    std::vector<std::optional<cplx>> amps(modes.size());
    parallel_for(modes.size(), workers, [&](std::size_t j) {
        ResonantMode& m = modes[j];
        m.normalization = mode_normalization(m, nopts, inner.size() ? &inner : nullptr, r_mesh);
        fields[j] = mode_field(m, scene.points);
        std::vector<cplx> at_quad(fields[j].begin(), fields[j].begin() + static_cast<std::ptrdiff_t>(nq));
        amps[j] = sem_amplitude(m, ic.f, ic.g, scene.quad, at_quad);
    });

    SemResult out;
    out.phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(scene.points.size()),
                                    static_cast<Eigen::Index>(times.size()));
    for (std::size_t j = 0; j < modes.size(); ++j) {
        const cplx w = modes[j].resonance.omega;
        if (!amps[j]) {
            std::ostringstream os;
            os << "mode " << w << " (null vector " << modes[j].index << ") has a vanishing normalization; excluded";
            out.warnings.push_back(os.str());
            continue;
        }
        const cplx a = *amps[j];
        double peak = 0.0;
        for (std::size_t i = 0; i < nq; ++i)
            peak = std::max(peak, std::abs(fields[j][i]));
        for (std::size_t t = 0; t < times.size(); ++t) {
            const cplx ft = 2.0 * a * std::exp(-I * w * times[t]);
            for (std::size_t i = 0; i < scene.points.size(); ++i)
                out.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) += (ft * fields[j][i]).real();
        }
        out.modes.push_back({modes[j], a, 2.0 * std::abs(a) * peak});
    }
    if (modes.empty())
        out.warnings.push_back("no resonances in the search region; the SEM field is zero");
    return out;
}

} // namespace wavescat
