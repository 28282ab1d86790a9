#include "wavescat/sem.hpp"

#include "wavescat/parallel.hpp"
#include "wavescat/specfun.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace wavescat {

namespace {

constexpr cplx I(0.0, 1.0);
constexpr double kPi = std::numbers::pi;

using Key = std::pair<double, double>;

Key key_of(cplx z)
{
    return {z.real(), z.imag()};
}

// Function value with a forward-difference estimate of (log f)'.
struct Sample {
    LogDet v;
    cplx dlog;
};

// Shared memo of function values and edge phase increments. Values depend only
// on the arguments, so concurrent users see identical numbers.
class PhaseTracker {
public:
    PhaseTracker(const AnalyticFn& f, const SearchOptions& opts) : f_(f), opts_(opts) {}

    Sample value(cplx z)
    {
        {
            std::lock_guard<std::mutex> g(mu_);
            auto it = values_.find(key_of(z));
            if (it != values_.end())
                return it->second;
        }
        const double eps = 1e-5 * std::max(1.0, std::abs(z));
        Sample v{f_(z), 0.0};
        LogDet e = f_(z + eps);
        v.dlog = cplx(e.log_abs - v.v.log_abs, std::arg(e.phase / v.v.phase)) / eps;
        evaluations_ += 2;
        std::lock_guard<std::mutex> g(mu_);
        values_.emplace(key_of(z), v);
        return v;
    }

    // Continuous change of arg f from a to b; NaN when unresolved.
    double edge(cplx a, cplx b)
    {
        if (key_of(b) < key_of(a))
            return -edge(b, a);
        std::pair<Key, Key> k{key_of(a), key_of(b)};
        {
            std::lock_guard<std::mutex> g(mu_);
            auto it = edges_.find(k);
            if (it != edges_.end())
                return it->second;
        }
        double d = increment(a, b, value(a), value(b), 0);
        std::lock_guard<std::mutex> g(mu_);
        edges_.emplace(k, d);
        return d;
    }

    std::size_t evaluations() const { return evaluations_; }

private:
    double increment(cplx a, cplx b, const Sample& fa, const Sample& fb, int depth)
    {
        if (!std::isfinite(fa.v.log_abs) || !std::isfinite(fb.v.log_abs))
            return std::numeric_limits<double>::quiet_NaN();
        double d = std::arg(fb.v.phase / fa.v.phase);
        if (!std::isfinite(d))
            return std::numeric_limits<double>::quiet_NaN();
        // Predicted phase change from either end must agree with a small observed step.
        double pa = (fa.dlog * (b - a)).imag(), pb = (fb.dlog * (b - a)).imag();
        bool smooth = std::isfinite(pa) && std::isfinite(pb) && std::abs(pa) < opts_.max_phase_step &&
                      std::abs(pb) < opts_.max_phase_step;
        if (std::abs(d) < opts_.max_phase_step && smooth)
            return d;
        if (depth >= opts_.max_edge_depth)
            return std::numeric_limits<double>::quiet_NaN();
        cplx m = 0.5 * (a + b);
        Sample fm = value(m);
        return increment(a, m, fa, fm, depth + 1) + increment(m, b, fm, fb, depth + 1);
    }

    const AnalyticFn& f_;
    const SearchOptions& opts_;
    std::mutex mu_;
    std::map<Key, Sample> values_;
    std::map<std::pair<Key, Key>, double> edges_;
    std::atomic<std::size_t> evaluations_{0};
};

struct TriangleOut {
    std::vector<Candidate> candidates;
    std::vector<FlaggedRegion> flagged;
};

void process_triangle(PhaseTracker& pt, const std::array<cplx, 3>& v, int depth, const SearchOptions& opts,
                      TriangleOut& out)
{
    double total = 0.0;
    for (int e = 0; e < 3; ++e)
        total += pt.edge(v[e], v[(e + 1) % 3]);
    if (!std::isfinite(total)) {
        out.flagged.push_back({v, "phase unresolved along an edge"});
        return;
    }
    long w = std::lround(total / (2 * kPi));
    if (w == 0)
        return;
    if (w < 0) {
        out.flagged.push_back({v, "negative winding " + std::to_string(w) + " (poles inside)"});
        return;
    }
    double diam = std::max({std::abs(v[0] - v[1]), std::abs(v[1] - v[2]), std::abs(v[2] - v[0])});
    bool split = depth < opts.max_depth && (diam > opts.mesh_tol || w >= 2);
    if (!split) {
        out.candidates.push_back({(v[0] + v[1] + v[2]) / 3.0, static_cast<int>(w), diam});
        return;
    }
    cplx m01 = 0.5 * (v[0] + v[1]), m12 = 0.5 * (v[1] + v[2]), m20 = 0.5 * (v[2] + v[0]);
    process_triangle(pt, {v[0], m01, m20}, depth + 1, opts, out);
    process_triangle(pt, {m01, v[1], m12}, depth + 1, opts, out);
    process_triangle(pt, {m20, m12, v[2]}, depth + 1, opts, out);
    process_triangle(pt, {m01, m12, m20}, depth + 1, opts, out);
}

std::vector<cplx> derivs(const std::vector<cplx>& c, int nmax)
{
    std::vector<cplx> d(static_cast<std::size_t>(nmax) + 1);
    d[0] = -c[1];
    for (int n = 1; n <= nmax; ++n)
        d[static_cast<std::size_t>(n)] = 0.5 * (c[static_cast<std::size_t>(n) - 1] - c[static_cast<std::size_t>(n) + 1]);
    return d;
}

cplx signed_order(const std::vector<cplx>& seq, int n)
{
    int an = std::abs(n);
    return (n < 0 && (an % 2)) ? -seq[static_cast<std::size_t>(an)] : seq[static_cast<std::size_t>(an)];
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * z * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        x[static_cast<std::size_t>(i)] = z;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

} // namespace

SearchResult find_resonances_global(const AnalyticFn& f, const ComplexRect& region, const SearchOptions& opts)
{
    SearchResult res;
    if (region.empty())
        return res;
    const double wr = region.re_hi - region.re_lo, wi = region.im_hi - region.im_lo;
    const int nx = std::max(1, static_cast<int>(std::ceil(wr / opts.initial_size)));
    const int ny = std::max(1, static_cast<int>(std::ceil(wi / opts.initial_size)));
    // Interior nodes are jittered off the round grid so that zeros at tidy
    // coordinates do not sit on an edge.
    auto node = [&](int i, int j) {
        double x = region.re_lo + wr * i / nx, y = region.im_lo + wi * j / ny;
        if (i > 0 && i < nx)
            x += 0.11 * (wr / nx) * (std::fmod(0.6180339887 * i + 0.4142135624 * j, 1.0) - 0.5);
        if (j > 0 && j < ny)
            y += 0.11 * (wi / ny) * (std::fmod(0.7320508076 * i + 0.2360679775 * j, 1.0) - 0.5);
        return cplx(x, y);
    };
    std::vector<std::array<cplx, 3>> tris;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            tris.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1)});
            tris.push_back({node(i, j), node(i + 1, j + 1), node(i, j + 1)});
        }
    PhaseTracker pt(f, opts);
    std::vector<TriangleOut> outs(tris.size());
    parallel_for(tris.size(), opts.workers, [&](std::size_t t) { process_triangle(pt, tris[t], 0, opts, outs[t]); });
    for (auto& o : outs) {
        res.candidates.insert(res.candidates.end(), o.candidates.begin(), o.candidates.end());
        res.flagged.insert(res.flagged.end(), o.flagged.begin(), o.flagged.end());
    }
    res.evaluations = pt.evaluations();
    return res;
}

Resonance refine_resonance(const MatrixFn& m, cplx omega0, const RefineOptions& opts)
{
    cplx w = omega0, best_w = omega0;
    double best = INFINITY;
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::MatrixXcd a = m(w);
        Eigen::MatrixXcd b = (m(w + opts.delta) - a) / opts.delta;
        EigenPair ep;
        bool pencil_ok = true;
        try {
            ep = smallest_generalized_eig(a, b);
        } catch (const std::runtime_error&) {
            ep = {INFINITY, null_vectors(a, 0.0).col(0)};
            pencil_ok = false;
        }
        Eigen::VectorXcd v = ep.vector.normalized();
        double r = (a * v).norm();
        if (std::isfinite(r) && r < best) {
            best = r;
            best_w = w;
        }
        if (r < opts.tol) {
            Resonance res;
            res.omega = w;
            res.residual = r;
            res.q_factor = q_factor(w);
            res.null_vectors = null_vectors(a, opts.null_tol);
            res.multiplicity = static_cast<int>(res.null_vectors.cols());
            return res;
        }
        if (!pencil_ok || !std::isfinite(ep.value.real()) || !std::isfinite(ep.value.imag()))
            break;
        w -= ep.value;
    }
    std::ostringstream os;
    os << "resonance refinement from " << omega0 << " did not converge; best residual " << best << " at "
       << best_w;
    throw RefinementError(os.str(), best_w, best);
}

ResonanceProblem srr_problem(const SrrGeometry& geom, const SrrTruncation& trunc, double omega_max, double c)
{
    int nd = srr_deflation_order(omega_max * geom.a / c);
    return {[=](cplx w) { return srr_search_det(geom, w, trunc, nd, c); },
            [=](cplx w) { return assemble_srr(geom, w, trunc, c, false).M; }};
}

ResonanceProblem cyl_problem(const CylinderArray& geom, int n_sol, double c)
{
    bool scaled = geom.size() == 1;
    return {[=](cplx w) { return cyl_search_det(geom, w, n_sol, c); },
            [=](cplx w) { return cyl_matrix(geom, w, n_sol, c, scaled); }};
}

ResonanceReport find_resonances(const ResonanceProblem& p, const ComplexRect& region, const SearchOptions& sopts,
                                const RefineOptions& ropts)
{
    ResonanceReport rep;
    SearchResult sr = find_resonances_global(p.search, region, sopts);
    rep.flagged = sr.flagged;
    rep.candidates = sr.candidates.size();

    std::vector<std::optional<Resonance>> refined(sr.candidates.size());
    std::vector<std::string> errors(sr.candidates.size());
    parallel_for(sr.candidates.size(), sopts.workers, [&](std::size_t i) {
        try {
            refined[i] = refine_resonance(p.matrix, sr.candidates[i].omega, ropts);
        } catch (const RefinementError& e) {
            errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < refined.size(); ++i) {
        const Candidate& cand = sr.candidates[i];
        if (!refined[i]) {
            rep.warnings.push_back(errors[i]);
            continue;
        }
        Resonance r = *refined[i];
        if (!region.contains(r.omega) || !(r.omega.imag() < 0.0)) {
            std::ostringstream os;
            os << "candidate " << cand.omega << " converged outside the region to " << r.omega;
            rep.warnings.push_back(os.str());
            continue;
        }
        r.multiplicity = std::max(r.multiplicity, cand.winding);
        auto dup = std::find_if(rep.accepted.begin(), rep.accepted.end(),
                                [&](const Resonance& q) { return std::abs(q.omega - r.omega) < 1e-8; });
        if (dup != rep.accepted.end()) {
            std::ostringstream os;
            os << "candidate " << cand.omega << " converged to the known resonance " << r.omega;
            rep.warnings.push_back(os.str());
            dup->multiplicity = std::max(dup->multiplicity, r.multiplicity);
            continue;
        }
        rep.accepted.push_back(std::move(r));
    }
    std::sort(rep.accepted.begin(), rep.accepted.end(),
              [](const Resonance& a, const Resonance& b) { return a.omega.real() < b.omega.real(); });
    return rep;
}

void write_resonance_csv(const std::vector<Resonance>& res, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    os << "re_omega,im_omega,q_factor,residual,multiplicity\n";
    char buf[160];
    for (const auto& r : res) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.6e,%d\n", r.omega.real(), r.omega.imag(), r.q_factor,
                      r.residual, r.multiplicity);
        os << buf;
    }
}

std::vector<Resonance> read_resonance_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(is, line);
    if (line != "re_omega,im_omega,q_factor,residual,multiplicity")
        throw std::runtime_error(path + ": unexpected resonance table header");
    std::vector<Resonance> out;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        Resonance r;
        double re, im;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%d", &re, &im, &r.q_factor, &r.residual, &r.multiplicity) != 5)
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        r.omega = {re, im};
        out.push_back(r);
    }
    return out;
}

std::vector<ResonantMode> extract_modes(const Resonance& res, const SrrGeometry& geom, const SrrTruncation& trunc,
                                        double c)
{
    SrrSystem sys = assemble_srr(geom, res.omega, trunc, c, false);
    Eigen::MatrixXcd nv = res.null_vectors.size() ? res.null_vectors : null_vectors(sys.M, 1e-9);
    const int ns = trunc.n_sol;
    auto hp = derivs(specfun::hankel1_seq(ns + 1, sys.ka), ns);
    auto jp = derivs(specfun::bessel_j_seq(ns + 1, sys.ka), ns);
    std::vector<ResonantMode> out;
    for (Eigen::Index col = 0; col < nv.cols(); ++col) {
        Eigen::VectorXcd D = srr_recover_D(sys, nv.col(col));
        ResonantMode m;
        m.resonance = res;
        m.geom = geom;
        m.c = c;
        m.n_sol = ns;
        m.index = static_cast<int>(col);
        m.b = geom.a;
        m.exterior.nmax = ns;
        m.exterior.values.resize(2 * ns + 1);
        m.interior.resize(2 * ns + 1);
        for (int n = -ns; n <= ns; ++n) {
            m.exterior.values(n + ns) = D(n + ns) / signed_order(hp, n);
            m.interior(n + ns) = D(n + ns) / signed_order(jp, n);
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<ResonantMode> extract_modes(const Resonance& res, const CylinderArray& geom, int n_sol, double c)
{
    if (geom.size() < 2)
        throw std::invalid_argument("mode extraction needs at least two cylinders");
    Eigen::MatrixXcd nv =
        res.null_vectors.size() ? res.null_vectors : null_vectors(cyl_matrix(geom, res.omega, n_sol, c), 1e-9);
    std::vector<ResonantMode> out;
    for (Eigen::Index col = 0; col < nv.cols(); ++col) {
        ResonantMode m;
        m.resonance = res;
        m.geom = geom;
        m.c = c;
        m.n_sol = n_sol;
        m.index = static_cast<int>(col);
        m.interior = nv.col(col);
        m.exterior = exterior_coeffs(m.interior, geom, res.omega, n_sol, c);
        m.b = 1.05 * geom.enclosing_radius();
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<cplx> mode_field(const ResonantMode& mode, const std::vector<Point2>& points)
{
    const cplx k = mode.k();
    std::vector<cplx> out(points.size());
    if (const auto* srr = std::get_if<SrrGeometry>(&mode.geom)) {
        const int ns = mode.n_sol;
        cplx ka = k * srr->a;
        auto hp = derivs(specfun::hankel1_seq(ns + 1, ka), ns);
        auto jp = derivs(specfun::bessel_j_seq(ns + 1, ka), ns);
        Eigen::VectorXcd C(2 * ns + 1), D(2 * ns + 1);
        for (int n = -ns; n <= ns; ++n) {
            C(n + ns) = mode.exterior.at(n) * signed_order(hp, n);
            D(n + ns) = mode.interior(n + ns) * signed_order(jp, n);
        }
        Eigen::MatrixXcd v = srr_multipole_sum(k, srr->a, points, C, D);
        for (std::size_t i = 0; i < points.size(); ++i)
            out[i] = v(static_cast<Eigen::Index>(i), 0);
        return out;
    }
    const auto& cyl = std::get<CylinderArray>(mode.geom);
    std::vector<Point2> near;
    std::vector<std::size_t> near_idx, far_idx;
    std::vector<Point2> far;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (to_polar({}, points[i]).r > mode.b) {
            far.push_back(points[i]);
            far_idx.push_back(i);
        } else {
            near.push_back(points[i]);
            near_idx.push_back(i);
        }
    }
    if (!near.empty()) {
        Eigen::MatrixXcd v = cyl_scattered_sum(cyl, k, mode.n_sol, near, mode.interior);
        for (std::size_t i = 0; i < near.size(); ++i)
            out[near_idx[i]] = v(static_cast<Eigen::Index>(i), 0);
    }
    if (!far.empty()) {
        auto v = eval_exterior(mode.exterior, k, far);
        for (std::size_t i = 0; i < far.size(); ++i)
            out[far_idx[i]] = v[i];
    }
    return out;
}

cplx normalize_outer(const ExteriorCoeffs& ct, cplx k, double b, bool boundary_term)
{
    const cplx kb = k * b;
    auto h = specfun::hankel1_seq(ct.nmax + 1, kb);
    cplx sum = 0.0;
    for (int n = -ct.nmax; n <= ct.nmax; ++n) {
        const std::size_t an = static_cast<std::size_t>(std::abs(n));
        cplx hn = h[an];
        cplx lo = an == 0 ? -h[1] : h[an - 1];
        cplx r1 = lo / hn, r2 = h[an + 1] / hn;
        // Bracket over H_n^2, with the coefficient products carrying H_n^2.
        cplx br = kb * r1 * r2 - kb;
        if (boundary_term)
            br -= 0.5 * (r1 - r2);
        cplx u = ct.at(n) * hn, v = ct.at(-n) * hn;
        double sgn = (an % 2) ? -1.0 : 1.0;
        sum += sgn * u * v * br;
    }
    return 2.0 * kPi * kb * sum;
}

cplx normalize_inner_bessel(const Eigen::VectorXcd& dt, cplx k, double a)
{
    const int N = static_cast<int>((dt.size() - 1) / 2);
    const cplx ka = k * a;
    auto j = specfun::bessel_j_seq(N + 1, ka);
    cplx sum = 0.0;
    for (int n = -N; n <= N; ++n) {
        const std::size_t an = static_cast<std::size_t>(std::abs(n));
        cplx jn = j[an];
        cplx lo = an == 0 ? -j[1] : j[an - 1];
        cplx r1 = lo / jn, r2 = j[an + 1] / jn;
        cplx br = ka - ka * r1 * r2 + 0.5 * (r1 - r2);
        cplx u = dt(n + N) * signed_order(j, n), v = dt(-n + N) * signed_order(j, -n);
        // u v already carries (-1)^n from the signed orders.
        sum += u * v * br;
    }
    return 2.0 * kPi * ka * sum;
}

cplx normalize_inner_quadrature(const ResonantMode& mode, const SpatialQuadrature& quad)
{
    if (quad.size() == 0)
        throw std::invalid_argument("inner normalization needs a non-empty quadrature of the inner region");
    auto phi = mode_field(mode, quad.points);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i)
        acc += phi[i] * phi[i] * quad.weights[i];
    const cplx k = mode.k();
    return 2.0 * k * k * acc;
}

cplx annulus_integral(const ResonantMode& mode, double r0, double r1, int n_radial, int n_angular)
{
    if (!(r1 > r0))
        return 0.0;
    std::vector<double> x, w;
    gauss_legendre(n_radial, x, w);
    std::vector<Point2> pts;
    std::vector<double> wts;
    const double dth = 2 * kPi / n_angular;
    for (int i = 0; i < n_radial; ++i) {
        double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * x[static_cast<std::size_t>(i)];
        double wr = 0.5 * (r1 - r0) * w[static_cast<std::size_t>(i)] * r * dth;
        for (int s = 0; s < n_angular; ++s) {
            pts.push_back(from_polar({}, {r, s * dth}));
            wts.push_back(wr);
        }
    }
    auto phi = eval_exterior(mode.exterior, mode.k(), pts);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        acc += phi[i] * phi[i] * wts[i];
    const cplx k = mode.k();
    return 2.0 * k * k * acc;
}

SpatialQuadrature cylinder_inner_quadrature(const CylinderArray& geom, double r, double h)
{
    return tri_quadrature(structured_mesh(MeshRegion{r, r, geom.a, geom.centers}, h));
}

cplx mode_normalization(const ResonantMode& mode, const NormalizationOptions& opts, const SpatialQuadrature* inner,
                        double r_mesh)
{
    const cplx k = mode.k();
    if (const auto* srr = std::get_if<SrrGeometry>(&mode.geom)) {
        if (std::abs(mode.b - srr->a) > 1e-14 * srr->a)
            throw std::invalid_argument("split-ring normalization is matched on the ring radius");
        return normalize_outer(mode.exterior, k, srr->a, true) + normalize_inner_bessel(mode.interior, k, srr->a);
    }
    const auto& cyl = std::get<CylinderArray>(mode.geom);
    if (r_mesh <= 0.0)
        r_mesh = 1.05 * cyl.enclosing_radius();
    if (mode.b < r_mesh - 1e-12)
        throw std::invalid_argument("matching radius lies inside the meshed disk");
    SpatialQuadrature own;
    if (!inner) {
        own = cylinder_inner_quadrature(cyl, r_mesh, opts.mesh_h);
        inner = &own;
    }
    cplx in = normalize_inner_quadrature(mode, *inner) +
              annulus_integral(mode, r_mesh, mode.b, opts.annulus_radial, opts.annulus_angular);
    if (opts.boundary_terms) {
        // Inner boundary integral of phi d_r phi on r = b; equal and opposite to the outer one.
        ExteriorCoeffs ct = mode.exterior;
        in += normalize_outer(ct, k, mode.b, false) - normalize_outer(ct, k, mode.b, true);
    }
    return in + normalize_outer(mode.exterior, k, mode.b, opts.boundary_terms);
}

std::optional<cplx> sem_amplitude(const ResonantMode& mode, const std::vector<double>& f, const std::vector<double>& g,
                                  const SpatialQuadrature& quad, const std::vector<cplx>& mode_at_quad)
{
    if (f.size() != quad.size() || g.size() != quad.size() || mode_at_quad.size() != quad.size())
        throw std::invalid_argument("sem_amplitude: sample counts differ from the quadrature");
    const cplx w = mode.resonance.omega;
    cplx num = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        num += (I * g[i] + w * f[i]) * mode_at_quad[i] * quad.weights[i];
        scale += std::norm(mode_at_quad[i]) * quad.weights[i];
    }
    num *= w / (mode.c * mode.c);
    const cplx k = mode.k();
    scale *= 2.0 * std::norm(k);
    if (!(std::abs(mode.normalization) > 1e-12 * scale))
        return std::nullopt;
    return num / mode.normalization;
}

Eigen::MatrixXd sem_field(const std::vector<ResonantMode>& modes, const std::vector<cplx>& amplitudes,
                          const std::vector<Point2>& points, const std::vector<double>& times)
{
    if (modes.size() != amplitudes.size())
        throw std::invalid_argument("sem_field: one amplitude per mode required");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()),
                                                static_cast<Eigen::Index>(times.size()));
    for (std::size_t j = 0; j < modes.size(); ++j) {
        if (amplitudes[j] == 0.0)
            continue;
        auto phi = mode_field(modes[j], points);
        for (std::size_t t = 0; t < times.size(); ++t) {
            cplx f = 2.0 * amplitudes[j] * std::exp(-I * modes[j].resonance.omega * times[t]);
            for (std::size_t i = 0; i < points.size(); ++i)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) += (f * phi[i]).real();
        }
    }
    return out;
}

} // namespace wavescat
