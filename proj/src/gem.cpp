#include "wavescat/gem.hpp"

#include "wavescat/parallel.hpp"
#include "wavescat/specfun.hpp"

#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace wavescat {

static_assert(std::endian::native == std::endian::little, "bank files are written in host byte order");

namespace fs = std::filesystem;

namespace {

constexpr cplx I(0.0, 1.0);
constexpr char kMagic[4] = {'W', 'V', 'S', 'C'};
constexpr std::uint32_t kVersion = 1;

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

std::vector<int> order_range(int n_inc)
{
    std::vector<int> out;
    for (int m = -n_inc; m <= n_inc; ++m)
        out.push_back(m);
    return out;
}

std::string chunk_meta(const std::string& bank_meta, int m)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(bank_meta);
    j["m"] = m;
    return j.dump();
}

std::uintmax_t header_bytes(const std::string& meta)
{
    return 4 + 4 + 4 + meta.size();
}

// Streams one chunk file: header, omega rows in order, CRC32 footer; renamed into place on finish.
class ChunkWriter {
public:
    ChunkWriter(std::string path, const std::string& meta) : path_(std::move(path)), tmp_(path_ + ".part")
    {
        os_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!os_)
            throw CacheError("cannot write bank chunk " + tmp_);
        std::uint32_t ver = kVersion, len = static_cast<std::uint32_t>(meta.size());
        put(kMagic, 4);
        put(&ver, 4);
        put(&len, 4);
        put(meta.data(), meta.size());
    }

    void append(const cplx* row, std::size_t n) { put(row, n * sizeof(cplx)); }

    void finish()
    {
        std::uint32_t crc = crc_;
        os_.write(reinterpret_cast<const char*>(&crc), 4);
        os_.close();
        if (!os_)
            throw CacheError("short write to bank chunk " + tmp_);
        std::error_code ec;
        fs::rename(tmp_, path_, ec);
        if (ec)
            throw CacheError("cannot move bank chunk into place: " + path_ + ": " + ec.message());
    }

private:
    void put(const void* p, std::size_t n)
    {
        os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!os_)
            throw CacheError("short write to bank chunk " + tmp_);
        crc_ = crc32_bytes(p, n, crc_);
    }

    std::string path_;
    std::string tmp_;
    std::ofstream os_;
    std::uint32_t crc_ = 0;
};

// Parses and verifies a chunk; returns the payload (points x omegas).
Eigen::MatrixXcd load_chunk(const std::string& path, const std::string& meta, std::size_t n_omega, std::size_t n_points)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw CacheError("missing bank chunk " + path);
    std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const std::uintmax_t payload = static_cast<std::uintmax_t>(n_omega) * n_points * sizeof(cplx);
    if (buf.size() != header_bytes(meta) + payload + 4)
        throw CacheError("bank chunk has wrong size: " + path);
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw CacheError("bank chunk has bad magic: " + path);
    std::uint32_t ver, len, crc;
    std::memcpy(&ver, buf.data() + 4, 4);
    std::memcpy(&len, buf.data() + 8, 4);
    if (ver != kVersion || len != meta.size() || buf.compare(12, len, meta) != 0)
        throw CacheError("bank chunk header does not match the configuration: " + path);
    std::memcpy(&crc, buf.data() + buf.size() - 4, 4);
    if (crc != crc32_bytes(buf.data(), buf.size() - 4))
        throw CacheError("bank chunk checksum mismatch: " + path);
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(n_omega));
    std::memcpy(out.data(), buf.data() + header_bytes(meta), payload);
    return out;
}

// coef(l) = dw_l A(l) e^{-i w_l t}
Eigen::VectorXcd time_weights(const Eigen::VectorXcd& amps, const FrequencyGrid& grid, double t)
{
    Eigen::VectorXcd w(amps.size());
    for (Eigen::Index l = 0; l < amps.size(); ++l) {
        double om = grid.omegas[static_cast<std::size_t>(l)];
        w(l) = grid.widths[static_cast<std::size_t>(l)] * amps(l) * std::exp(-I * (om * t));
    }
    return w;
}

void add_products(const Eigen::MatrixXcd& cols, const Eigen::VectorXcd& amps, const FrequencyGrid& grid,
                  FieldSnapshots& out)
{
    // cols: points x omegas for one order.
    const bool eta = out.eta.size() > 0;
    Eigen::VectorXcd om(amps.size());
    for (Eigen::Index l = 0; l < amps.size(); ++l)
        om(l) = -I * grid.omegas[static_cast<std::size_t>(l)];
    for (std::size_t it = 0; it < out.times.size(); ++it) {
        Eigen::VectorXcd w = time_weights(amps, grid, out.times[it]);
        auto c = static_cast<Eigen::Index>(it);
        out.phi.col(c) += 2.0 * (cols * w).real();
        if (eta)
            out.eta.col(c) += 2.0 * (cols * om.cwiseProduct(w)).real();
    }
}

FieldSnapshots empty_snapshots(std::size_t n_points, const std::vector<double>& times, bool with_eta)
{
    FieldSnapshots s;
    s.times = times;
    s.phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(times.size()));
    if (with_eta)
        s.eta = s.phi;
    return s;
}

void check_ics(const std::vector<InitialData>& ics, const SpatialQuadrature& quad)
{
    for (const auto& ic : ics)
        if (ic.f.size() != quad.size() || ic.g.size() != quad.size())
            throw std::invalid_argument("initial data must be sampled at every quadrature point");
}

} // namespace

std::uint32_t crc32_bytes(const void* data, std::size_t n, std::uint32_t seed)
{
    uLong crc = seed;
    const auto* p = static_cast<const Bytef*>(data);
    while (n > 0) {
        uInt step = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, p, step);
        p += step;
        n -= step;
    }
    return static_cast<std::uint32_t>(crc);
}

std::uint64_t fnv1a64(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

Eigen::MatrixXcd FreeFieldSolver::fields(cplx omega, const std::vector<Point2>& points,
                                         const std::vector<int>& orders) const
{
    int mmax = 0;
    for (int m : orders)
        mmax = std::max(mmax, std::abs(m));
    const cplx k = omega / c_;
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(orders.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        Polar q = to_polar({}, points[i]);
        auto j = specfun::bessel_j_seq(mmax, k * q.r);
        for (std::size_t col = 0; col < orders.size(); ++col) {
            int m = orders[col], am = std::abs(m);
            cplx jm = (m < 0 && am % 2) ? -j[static_cast<std::size_t>(am)] : j[static_cast<std::size_t>(am)];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = jm * std::exp(I * (m * q.theta));
        }
    }
    return out;
}

std::string FreeFieldSolver::fingerprint() const
{
    return "free field c=" + g17(c_);
}

SolutionBank::SolutionBank(std::string cache_root, const std::string& solver_fingerprint,
                           const std::vector<Point2>& points, const FrequencyGrid& grid, int n_inc)
    : n_inc_(n_inc), n_omega_(grid.size()), n_points_(points.size())
{
    if (n_inc < 0)
        throw std::invalid_argument("n_inc must be non-negative");
    std::string pts;
    for (const auto& p : points)
        pts += g17(p.x) + "," + g17(p.y) + ";";
    nlohmann::ordered_json j;
    j["format"] = "wavescat solution bank";
    j["version"] = kVersion;
    j["solver"] = solver_fingerprint;
    j["n_inc"] = n_inc;
    j["n_points"] = points.size();
    j["points_fnv1a"] = hex64(fnv1a64(pts));
    std::vector<std::string> om;
    for (double w : grid.omegas)
        om.push_back(g17(w));
    j["omegas"] = om;
    meta_ = j.dump();
    key_ = hex64(fnv1a64(meta_));
    dir_ = (fs::path(cache_root) / ("bank-" + key_)).string();
}

std::uintmax_t SolutionBank::chunk_bytes() const
{
    return header_bytes(chunk_meta(meta_, n_inc_)) + 4 +
           static_cast<std::uintmax_t>(n_omega_) * n_points_ * sizeof(cplx);
}

std::string SolutionBank::chunk_path(int m) const
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "m%+04d.wvsc", m);
    return (fs::path(dir_) / buf).string();
}

bool SolutionBank::has_chunk(int m) const
{
    try {
        load_chunk(chunk_path(m), chunk_meta(meta_, m), n_omega_, n_points_);
        return true;
    } catch (const CacheError&) {
        return false;
    }
}

Eigen::MatrixXcd SolutionBank::read_chunk(int m) const
{
    if (std::abs(m) > n_inc_)
        throw std::out_of_range("order outside the bank");
    return load_chunk(chunk_path(m), chunk_meta(meta_, m), n_omega_, n_points_).transpose();
}

void frequency_sweep(const FrequencySolver& solver, const std::vector<Point2>& points, const FrequencyGrid& grid,
                     const std::vector<int>& orders, int workers,
                     const std::function<void(std::size_t, const Eigen::MatrixXcd&)>& sink)
{
    const std::size_t n = grid.size();
    const std::size_t batch = static_cast<std::size_t>(std::max(1, workers));
    std::vector<Eigen::MatrixXcd> slots(batch);
    for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t cnt = std::min(batch, n - start);
        parallel_for(cnt, workers, [&](std::size_t i) {
            Eigen::MatrixXcd P = solver.fields(cplx(grid.omegas[start + i], 0.0), points, orders);
            if (!P.allFinite())
                throw std::runtime_error("non-finite frequency solution at omega = " + g17(grid.omegas[start + i]));
            slots[i] = std::move(P);
        });
        for (std::size_t i = 0; i < cnt; ++i)
            sink(start + i, slots[i]);
    }
}

SolutionBank build_bank(const FrequencySolver& solver, const std::vector<Point2>& points, const FrequencyGrid& grid,
                        int n_inc, const std::string& cache_root, int workers, const LogFn& log)
{
    SolutionBank bank(cache_root, solver.fingerprint(), points, grid, n_inc);
    std::error_code ec;
    fs::create_directories(bank.dir(), ec);
    if (ec)
        throw CacheError("cannot create cache directory " + bank.dir() + ": " + ec.message());

    std::vector<int> missing;
    for (int m = -n_inc; m <= n_inc; ++m) {
        if (bank.has_chunk(m))
            continue;
        if (fs::exists(bank.chunk_path(m)) && log)
            log("bank chunk " + bank.chunk_path(m) + " failed verification; recomputing");
        missing.push_back(m);
    }
    if (missing.empty()) {
        if (log)
            log("bank " + bank.key() + " complete in cache");
        return bank;
    }

    const std::uintmax_t need = bank.chunk_bytes() * missing.size();
    auto space = fs::space(bank.dir(), ec);
    if (!ec && space.available < need + (64ull << 20))
        throw CacheError("insufficient disk space for bank " + bank.key() + ": need about " +
                         std::to_string(need >> 20) + " MiB, available " + std::to_string(space.available >> 20) +
                         " MiB");

    std::vector<std::unique_ptr<ChunkWriter>> writers;
    for (int m : missing)
        writers.push_back(std::make_unique<ChunkWriter>(bank.chunk_path(m), chunk_meta(bank.metadata(), m)));
    frequency_sweep(solver, points, grid, missing, workers, [&](std::size_t, const Eigen::MatrixXcd& P) {
        for (std::size_t c = 0; c < missing.size(); ++c)
            writers[c]->append(P.col(static_cast<Eigen::Index>(c)).data(), points.size());
    });
    for (std::size_t c = 0; c < missing.size(); ++c) {
        writers[c]->finish();
        if (log)
            log("wrote bank chunk m=" + std::to_string(missing[c]));
    }
    return bank;
}

Eigen::VectorXcd chunk_amplitudes(const Eigen::MatrixXcd& phi, const std::vector<double>& omegas,
                                  const SpatialQuadrature& quad, const InitialData& ic, double c)
{
    const auto nq = static_cast<Eigen::Index>(quad.size());
    if (phi.cols() < nq || phi.rows() != static_cast<Eigen::Index>(omegas.size()))
        throw std::invalid_argument("chunk_amplitudes: block does not match the quadrature and grid");
    Eigen::VectorXd wf(nq), wg(nq);
    for (Eigen::Index j = 0; j < nq; ++j) {
        auto s = static_cast<std::size_t>(j);
        wf(j) = ic.f[s] * quad.weights[s];
        wg(j) = ic.g[s] * quad.weights[s];
    }
    Eigen::MatrixXcd conj = phi.leftCols(nq).conjugate();
    Eigen::VectorXcd sf = conj * wf.cast<cplx>();
    Eigen::VectorXcd sg = conj * wg.cast<cplx>();
    const double scale = 1.0 / (4.0 * std::numbers::pi * c * c);
    Eigen::VectorXcd out(phi.rows());
    for (Eigen::Index l = 0; l < phi.rows(); ++l)
        out(l) = scale * (I * sg(l) + omegas[static_cast<std::size_t>(l)] * sf(l));
    return out;
}

void accumulate_snapshots(const Eigen::MatrixXcd& phi, const Eigen::VectorXcd& amps, const FrequencyGrid& grid,
                          FieldSnapshots& out)
{
    add_products(phi.transpose(), amps, grid, out);
}

std::vector<GemResult> gem_from_bank(const SolutionBank& bank, const FrequencyGrid& grid, const SpatialQuadrature& quad,
                                     const std::vector<InitialData>& ics, double c, const std::vector<double>& times,
                                     bool with_eta)
{
    check_ics(ics, quad);
    if (bank.n_omega() != grid.size() || bank.n_points() < quad.size())
        throw std::invalid_argument("bank does not match the frequency grid or quadrature");
    const int n_inc = bank.n_inc();
    std::vector<GemResult> res(ics.size());
    for (auto& r : res) {
        r.amplitudes.n_inc = n_inc;
        r.amplitudes.omegas = grid.omegas;
        r.amplitudes.widths = grid.widths;
        r.amplitudes.A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), 2 * n_inc + 1);
        r.snapshots = empty_snapshots(bank.n_points(), times, with_eta);
    }
    for (int m = -n_inc; m <= n_inc; ++m) {
        Eigen::MatrixXcd block = bank.read_chunk(m);
        Eigen::MatrixXcd cols = block.transpose();
        for (std::size_t q = 0; q < ics.size(); ++q) {
            Eigen::VectorXcd a = chunk_amplitudes(block, grid.omegas, quad, ics[q], c);
            res[q].amplitudes.A.col(m + n_inc) = a;
            add_products(cols, a, grid, res[q].snapshots);
        }
    }
    return res;
}

std::vector<GemResult> gem_streaming(const FrequencySolver& solver, const std::vector<Point2>& points,
                                     const FrequencyGrid& grid, int n_inc, const SpatialQuadrature& quad,
                                     const std::vector<InitialData>& ics, double c, const std::vector<double>& times,
                                     int workers, bool with_eta)
{
    check_ics(ics, quad);
    if (points.size() < quad.size())
        throw std::invalid_argument("output points must start with the quadrature points");
    const auto orders = order_range(n_inc);
    std::vector<GemResult> res(ics.size());
    for (auto& r : res) {
        r.amplitudes.n_inc = n_inc;
        r.amplitudes.omegas = grid.omegas;
        r.amplitudes.widths = grid.widths;
        r.amplitudes.A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), 2 * n_inc + 1);
        r.snapshots = empty_snapshots(points.size(), times, with_eta);
    }
    frequency_sweep(solver, points, grid, orders, workers, [&](std::size_t l, const Eigen::MatrixXcd& P) {
        FrequencyGrid one;
        one.omegas = {grid.omegas[l]};
        one.widths = {grid.widths[l]};
        one.omega_max = grid.omega_max;
        for (std::size_t q = 0; q < ics.size(); ++q) {
            for (std::size_t col = 0; col < orders.size(); ++col) {
                auto cc = static_cast<Eigen::Index>(col);
                Eigen::VectorXcd a =
                    chunk_amplitudes(P.col(cc).transpose(), one.omegas, quad, ics[q], c);
                res[q].amplitudes.A(static_cast<Eigen::Index>(l), cc) = a(0);
                add_products(P.col(cc), a, one, res[q].snapshots);
            }
        }
    });
    return res;
}

double reconstruction_error(const Eigen::VectorXd& phi0, const std::vector<double>& f)
{
    if (static_cast<std::size_t>(phi0.size()) != f.size())
        throw std::invalid_argument("reconstruction_error: point sets differ");
    double e = 0.0;
    for (Eigen::Index j = 0; j < phi0.size(); ++j)
        e = std::max(e, std::abs(phi0(j) - f[static_cast<std::size_t>(j)]));
    return e;
}

double spectral_energy(const SpectralAmplitudes& amps, double rho0)
{
    double s = 0.0;
    for (Eigen::Index m = 0; m < amps.A.cols(); ++m)
        for (Eigen::Index l = 0; l < amps.A.rows(); ++l) {
            auto i = static_cast<std::size_t>(l);
            s += 4.0 * std::numbers::pi * amps.omegas[i] * std::norm(amps.A(l, m)) * amps.widths[i];
        }
    return 0.5 * rho0 * 2.0 * s;
}

} // namespace wavescat
