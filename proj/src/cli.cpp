#include "wavescat/cli.hpp"

#include "wavescat/parallel.hpp"
#include "wavescat/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace wavescat {

namespace fs = std::filesystem;

namespace {

const char* kVersionString = "wavescat 1.0.0";

std::string g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string file_crc(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is)
        return "";
    std::uint32_t crc = 0;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof buf);
        crc = crc32_bytes(buf, static_cast<std::size_t>(is.gcount()), crc);
    }
    char out[9];
    std::snprintf(out, sizeof out, "%08x", crc);
    return out;
}

void write_atomic(const fs::path& p, const std::string& content)
{
    fs::path tmp = p;
    tmp += ".part";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        os << content;
        if (!os)
            throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
}

class Logger {
public:
    explicit Logger(bool quiet) : quiet_(quiet) {}
    void operator()(const std::string& m) const
    {
        if (!quiet_)
            std::cerr << "[wavescat] " << m << "\n";
    }
    LogFn fn() const
    {
        return [this](const std::string& m) { (*this)(m); };
    }

private:
    bool quiet_;
};

class Manifest {
public:
    Manifest(const fs::path& dir, const ExperimentConfig& cfg) : dir_(dir), path_(dir / "manifest.json")
    {
        hash_ = config_hash(cfg);
        std::ifstream is(path_);
        if (is) {
            try {
                auto j = nlohmann::ordered_json::parse(is);
                if (j.value("config_hash", "") == hash_)
                    j_ = j;
            } catch (const nlohmann::json::exception&) {
                // unreadable manifest: start over
            }
        }
        if (j_.is_null()) {
            j_["config_hash"] = hash_;
            j_["stages"] = nlohmann::ordered_json::object();
        }
        j_["version"] = kVersionString;
        j_["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
        j_["config"] = cfg.name;
    }

    const std::string& hash() const { return hash_; }

    bool done(const std::string& stage) const
    {
        if (!j_["stages"].contains(stage))
            return false;
        for (const auto& o : j_["stages"][stage]["outputs"]) {
            fs::path p = dir_ / o["path"].get<std::string>();
            if (!fs::exists(p) || file_crc(p) != o["crc32"].get<std::string>())
                return false;
        }
        return true;
    }

    nlohmann::ordered_json& stage(const std::string& name) { return j_["stages"][name]; }
    nlohmann::ordered_json& root() { return j_; }

    void record(const std::string& name, double seconds, const std::vector<std::string>& outputs)
    {
        auto& s = j_["stages"][name];
        s["seconds"] = seconds;
        s["outputs"] = nlohmann::ordered_json::array();
        for (const auto& o : outputs)
            s["outputs"].push_back({{"path", o}, {"crc32", file_crc(dir_ / o)}});
    }

    void save() const { write_atomic(path_, j_.dump(2) + "\n"); }

private:
    fs::path dir_;
    fs::path path_;
    std::string hash_;
    nlohmann::ordered_json j_;
};

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

fs::path prepare_out(const RunOptions& opts)
{
    fs::path dir = opts.out_dir.empty() ? fs::path("out") : fs::path(opts.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::string snapshot_name(const std::string& kind, std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_t%02zu.csv", kind.c_str(), i);
    return buf;
}

std::string snapshot_text(const std::string& kind, const Scene& scene, const std::string& hash, double t,
                          const Eigen::VectorXd& phi, const Eigen::VectorXd* eta)
{
    std::string s = "# wavescat " + kind + " t=" + g17(t) + " config=" + hash + " n_quad=" +
                    std::to_string(scene.n_quad()) + " n_probes=" + std::to_string(scene.n_probes()) + "\n";
    s += eta ? "x,y,phi,eta\n" : "x,y,phi\n";
    char buf[128];
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        auto r = static_cast<Eigen::Index>(i);
        if (eta)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", scene.points[i].x, scene.points[i].y, phi(r),
                          (*eta)(r));
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", scene.points[i].x, scene.points[i].y, phi(r));
        s += buf;
    }
    return s;
}

struct SnapshotFile {
    std::vector<Point2> points;
    std::vector<double> phi;
};

SnapshotFile read_snapshot(const fs::path& p)
{
    std::ifstream is(p);
    if (!is)
        throw std::runtime_error("cannot read " + p.string());
    SnapshotFile s;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'x')
            continue;
        double x, y, v;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v) != 3)
            throw std::runtime_error(p.string() + ": malformed row");
        s.points.push_back({x, y});
        s.phi.push_back(v);
    }
    return s;
}

ResonanceReport resonances_for(const ExperimentConfig& cfg, const RunOptions& opts, const Logger& log)
{
    return search_resonances(cfg, opts.workers, opts.cache_dir, log.fn());
}

FrequencyGrid grid_for(const ExperimentConfig& cfg, const RunOptions& opts, const Logger& log)
{
    std::vector<Resonance> res;
    if (cfg.refine_resonances)
        res = resonances_for(cfg, opts, log).accepted;
    FrequencyGrid g = gem_grid(cfg, res);
    log("frequency grid: " + std::to_string(g.size()) + " samples up to " + g17(cfg.omega_max));
    return g;
}

} // namespace

int cmd_resonances(const ExperimentConfig& cfg, const RunOptions& opts)
{
    Logger log(opts.quiet);
    fs::path dir = prepare_out(opts);
    Manifest man(dir, cfg);
    Timer t;
    ResonanceReport rep = resonances_for(cfg, opts, log);
    write_resonance_csv(rep.accepted, (dir / "resonances.csv").string());
    std::vector<std::string> outputs{"resonances.csv"};
    for (const auto& w : rep.warnings)
        log("warning: " + w);
    if (!rep.flagged.empty()) {
        std::ostringstream os;
        os << "vertex_1,vertex_2,vertex_3,reason\n";
        for (const auto& f : rep.flagged)
            os << f.vertices[0] << "," << f.vertices[1] << "," << f.vertices[2] << "," << f.reason << "\n";
        write_atomic(dir / "flagged_regions.csv", os.str());
        outputs.push_back("flagged_regions.csv");
    }
    man.record("resonances", t.seconds(), outputs);
    man.stage("resonances")["count"] = rep.accepted.size();
    man.stage("resonances")["flagged"] = rep.flagged.size();
    man.root()["resonance_count"] = rep.accepted.size();
    man.save();
    log(std::to_string(rep.accepted.size()) + " resonances written to " + (dir / "resonances.csv").string());
    if (!rep.flagged.empty()) {
        std::cerr << "error: " << rep.flagged.size() << " search regions could not be resolved; see "
                  << (dir / "flagged_regions.csv").string() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_bank(const ExperimentConfig& cfg, const RunOptions& opts)
{
    Logger log(opts.quiet);
    Scene scene = make_scene(cfg);
    FrequencyGrid grid = grid_for(cfg, opts, log);
    Timer t;
    SolutionBank bank = build_bank(*scene.solver, scene.points, grid, cfg.n_inc, opts.cache_dir, opts.workers, log.fn());
    log("bank " + bank.key() + " ready in " + bank.dir() + " (" + g17(t.seconds()) + " s)");
    return kExitOk;
}

int cmd_gem(const ExperimentConfig& cfg, const RunOptions& opts)
{
    Logger log(opts.quiet);
    fs::path dir = prepare_out(opts);
    Manifest man(dir, cfg);
    if (man.done("gem")) {
        log("gem outputs up to date; skipping");
        return kExitOk;
    }
    Scene scene = make_scene(cfg);
    FrequencyGrid grid = grid_for(cfg, opts, log);
    Timer t;
    SolutionBank bank = build_bank(*scene.solver, scene.points, grid, cfg.n_inc, opts.cache_dir, opts.workers, log.fn());
    double t_bank = t.seconds();
    InitialData ic = initial_data(cfg, scene.quad);
    auto res = gem_from_bank(bank, grid, scene.quad, {ic}, cfg.c, cfg.times, cfg.eta);
    const FieldSnapshots& snap = res[0].snapshots;

    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
        Eigen::VectorXd eta;
        if (cfg.eta)
            eta = snap.eta.col(static_cast<Eigen::Index>(i));
        std::string name = snapshot_name("gem", i);
        write_atomic(dir / name, snapshot_text("gem", scene, man.hash(), cfg.times[i],
                                               snap.phi.col(static_cast<Eigen::Index>(i)), cfg.eta ? &eta : nullptr));
        outputs.push_back(name);
    }
    std::optional<double> err;
    for (std::size_t i = 0; i < cfg.times.size(); ++i)
        if (cfg.times[i] == 0.0 && cfg.g.kind == IcKind::Zero)
            err = reconstruction_error(snap.phi.col(static_cast<Eigen::Index>(i)).head(
                                           static_cast<Eigen::Index>(scene.n_quad())),
                                       ic.f);
    double energy = spectral_energy(res[0].amplitudes, cfg.rho0);

    man.record("gem", t.seconds(), outputs);
    man.stage("gem")["bank"] = bank.key();
    man.stage("gem")["bank_seconds"] = t_bank;
    man.stage("gem")["n_omega"] = grid.size();
    man.stage("gem")["spectral_energy"] = energy;
    if (err) {
        man.stage("gem")["reconstruction_error"] = *err;
        man.root()["reconstruction_error"] = *err;
        std::cout << "reconstruction error " << g17(*err) << "\n";
    }
    man.save();
    log("gem snapshots written to " + dir.string());
    return kExitOk;
}

int cmd_sem(const ExperimentConfig& cfg, const RunOptions& opts)
{
    Logger log(opts.quiet);
    fs::path dir = prepare_out(opts);
    Manifest man(dir, cfg);
    if (man.done("sem")) {
        log("sem outputs up to date; skipping");
        return kExitOk;
    }
    Scene scene = make_scene(cfg);
    ResonanceReport rep = resonances_for(cfg, opts, log);
    Timer t;
    InitialData ic = initial_data(cfg, scene.quad);
    SemResult sem = run_sem(scene, rep.accepted, ic, cfg.times, opts.workers);
    for (const auto& w : sem.warnings)
        log("warning: " + w);

    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
        std::string name = snapshot_name("sem", i);
        write_atomic(dir / name, snapshot_text("sem", scene, man.hash(), cfg.times[i],
                                               sem.phi.col(static_cast<Eigen::Index>(i)), nullptr));
        outputs.push_back(name);
    }

    std::vector<std::size_t> order(sem.modes.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sem.modes[a].peak > sem.modes[b].peak; });
    std::string table = "rank,re_omega,im_omega,q_factor,mode_index,re_amplitude,im_amplitude,peak_contribution\n";
    char buf[256];
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& m = sem.modes[order[r]];
        const cplx w = m.mode.resonance.omega;
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", r + 1, w.real(), w.imag(),
                      q_factor(w), m.mode.index, m.amplitude.real(), m.amplitude.imag(), m.peak);
        table += buf;
    }
    write_atomic(dir / "sem_amplitudes.csv", table);
    outputs.push_back("sem_amplitudes.csv");

    man.record("sem", t.seconds(), outputs);
    man.stage("sem")["modes"] = sem.modes.size();
    man.stage("sem")["warnings"] = sem.warnings;
    man.root()["resonance_count"] = rep.accepted.size();
    man.save();
    log("sem snapshots written to " + dir.string());
    return kExitOk;
}

int cmd_compare(const ExperimentConfig& cfg, const RunOptions& opts)
{
    Logger log(opts.quiet);
    if (cfg.probes.empty())
        throw ConfigError("compare needs at least one point in 'domain.probes'");
    if (int rc = cmd_gem(cfg, opts))
        return rc;
    if (int rc = cmd_sem(cfg, opts))
        return rc;
    fs::path dir = prepare_out(opts);
    Manifest man(dir, cfg);
    Timer t;

    std::ostringstream os;
    os << "t,x,y,gem,sem,abs_diff,rel_diff\n";
    std::vector<double> first_probe;
    std::vector<double> first_probe_times;
    char buf[256];
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
        SnapshotFile a = read_snapshot(dir / snapshot_name("gem", i));
        SnapshotFile b = read_snapshot(dir / snapshot_name("sem", i));
        if (a.points.size() != b.points.size())
            throw ConfigError("gem and sem snapshots use different grids");
        for (std::size_t k = 0; k < a.points.size(); ++k)
            if (!(a.points[k] == b.points[k]))
                throw ConfigError("gem and sem snapshots use different grids");
        const std::size_t np = cfg.probes.size();
        if (a.points.size() < np)
            throw ConfigError("snapshots are missing the probe rows");
        for (std::size_t p = 0; p < np; ++p) {
            std::size_t k = a.points.size() - np + p;
            double d = std::abs(a.phi[k] - b.phi[k]);
            double rel = a.phi[k] != 0.0 ? d / std::abs(a.phi[k]) : 0.0;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", cfg.times[i],
                          a.points[k].x, a.points[k].y, a.phi[k], b.phi[k], d, rel);
            os << buf;
            if (p == 0 && cfg.times[i] > 0.0) {
                first_probe.push_back(d);
                first_probe_times.push_back(cfg.times[i]);
            }
        }
    }
    write_atomic(dir / "compare.csv", os.str());

    bool monotone = true;
    for (std::size_t i = 1; i < first_probe.size(); ++i)
        monotone = monotone && first_probe[i] <= first_probe[i - 1];
    double ratio = first_probe.size() >= 2 && first_probe.front() > 0.0 ? first_probe.back() / first_probe.front() : 0.0;
    man.record("compare", t.seconds(), {"compare.csv"});
    man.stage("compare")["envelope_non_increasing"] = monotone;
    man.stage("compare")["envelope_last_over_first"] = ratio;
    man.save();
    std::cout << "probe (" << g17(cfg.probes[0].x) << ", " << g17(cfg.probes[0].y)
              << "): |gem - sem| non-increasing over t > 0: " << (monotone ? "yes" : "no")
              << ", last/first = " << g17(ratio) << "\n";
    return kExitOk;
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"Time-domain 2D wave scattering by sound-hard obstacles: GEM and SEM pipelines"};
    app.set_version_flag("--version", kVersionString);
    app.require_subcommand(1);

    std::string config_path, preset_name, cache_dir, out_dir;
    int workers = 0;
    bool quiet = false;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"resonances", "search and refine complex resonances; writes resonances.csv"},
        {"bank", "build the frequency solution bank in the cache"},
        {"gem", "time-domain snapshots by the generalized eigenfunction expansion"},
        {"sem", "time-domain snapshots by the singularity expansion"},
        {"compare", "GEM and SEM side by side at the probe points"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sc = app.add_subcommand(name, help);
        auto* c = sc->add_option("--config", config_path, "experiment config file (TOML)");
        auto* p = sc->add_option("--preset", preset_name, "built-in experiment")
                      ->check(CLI::IsMember(preset_names()));
        c->excludes(p);
        sc->add_option("--cache-dir", cache_dir, "cache directory (overrides WAVESCAT_CACHE_DIR and the config)");
        sc->add_option("--out-dir", out_dir, "output directory (overrides the config)");
        sc->add_option("--workers", workers, "worker threads (default: hardware concurrency)")
            ->check(CLI::PositiveNumber);
        sc->add_flag("-q,--quiet", quiet, "suppress progress messages");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path);
        else if (!preset_name.empty())
            cfg = preset(preset_name);
        else
            throw ConfigError("one of --config or --preset is required");

        RunOptions opts;
        opts.quiet = quiet;
        opts.workers = workers > 0 ? workers : default_workers();
        opts.out_dir = out_dir.empty() ? cfg.out_dir : out_dir;
        if (!cache_dir.empty())
            opts.cache_dir = cache_dir;
        else if (const char* env = std::getenv("WAVESCAT_CACHE_DIR"); env && *env)
            opts.cache_dir = env;
        else
            opts.cache_dir = cfg.cache_dir;

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "resonances")
            return cmd_resonances(cfg, opts);
        if (cmd == "bank")
            return cmd_bank(cfg, opts);
        if (cmd == "gem")
            return cmd_gem(cfg, opts);
        if (cmd == "sem")
            return cmd_sem(cfg, opts);
        return cmd_compare(cfg, opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CacheError& e) {
        std::cerr << "cache error: " << e.what() << "\n";
        return kExitCache;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace wavescat
