#include "wavescat/config.hpp"

#include "wavescat/gem.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace wavescat {

namespace {

using KeySet = std::set<std::string>;

void reject_unknown(const toml::table& t, const KeySet& allowed, const std::string& where)
{
    for (const auto& [k, v] : t) {
        std::string key(k.str());
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

const toml::table* table_at(const toml::table& t, const std::string& key, const std::string& where)
{
    const toml::node* n = t.get(key);
    if (!n)
        return nullptr;
    const toml::table* tt = n->as_table();
    if (!tt)
        throw ConfigError("'" + where + "' must be a table");
    return tt;
}

void read_double(const toml::table& t, const std::string& key, const std::string& where, double& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer()))
        out = *v;
    else
        throw ConfigError("'" + where + "." + key + "' must be a number");
}

void read_int(const toml::table& t, const std::string& key, const std::string& where, int& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    if (!n->is_integer())
        throw ConfigError("'" + where + "." + key + "' must be an integer");
    out = static_cast<int>(*n->value<std::int64_t>());
}

void read_bool(const toml::table& t, const std::string& key, const std::string& where, bool& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    if (!n->is_boolean())
        throw ConfigError("'" + where + "." + key + "' must be true or false");
    out = *n->value<bool>();
}

void read_string(const toml::table& t, const std::string& key, const std::string& where, std::string& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    if (!n->is_string())
        throw ConfigError("'" + where + "." + key + "' must be a string");
    out = *n->value<std::string>();
}

double number_of(const toml::node& n, const std::string& where)
{
    if (!(n.is_floating_point() || n.is_integer()))
        throw ConfigError("'" + where + "' must contain numbers");
    return *n.value<double>();
}

Point2 point_of(const toml::node& n, const std::string& where)
{
    const toml::array* a = n.as_array();
    if (!a || a->size() != 2)
        throw ConfigError("'" + where + "' must be a pair [x, y]");
    return {number_of((*a)[0], where), number_of((*a)[1], where)};
}

void read_points(const toml::table& t, const std::string& key, const std::string& where, std::vector<Point2>& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    const toml::array* a = n->as_array();
    if (!a)
        throw ConfigError("'" + where + "." + key + "' must be an array of [x, y] pairs");
    out.clear();
    for (const auto& e : *a)
        out.push_back(point_of(e, where + "." + key));
}

void read_doubles(const toml::table& t, const std::string& key, const std::string& where, std::vector<double>& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    const toml::array* a = n->as_array();
    if (!a)
        throw ConfigError("'" + where + "." + key + "' must be an array of numbers");
    out.clear();
    for (const auto& e : *a)
        out.push_back(number_of(e, where + "." + key));
}

const std::map<std::string, IcKind> kIcKinds{
    {"zero", IcKind::Zero}, {"gaussian", IcKind::Gaussian}, {"dipole", IcKind::Dipole},
    {"quadrupole", IcKind::Quadrupole}};

std::string ic_name(IcKind k)
{
    for (const auto& [name, kind] : kIcKinds)
        if (kind == k)
            return name;
    throw ConfigError("initial condition kind cannot be written to a config");
}

InitialCondition read_ic(const toml::table& t, const std::string& where)
{
    reject_unknown(t, {"kind", "decay", "center", "kx", "ky"}, where);
    std::string kind = "zero";
    read_string(t, "kind", where, kind);
    auto it = kIcKinds.find(kind);
    if (it == kIcKinds.end())
        throw ConfigError("'" + where + ".kind' must be one of zero, gaussian, dipole, quadrupole");
    InitialCondition ic;
    ic.kind = it->second;
    read_double(t, "decay", where, ic.decay);
    read_double(t, "kx", where, ic.kx);
    read_double(t, "ky", where, ic.ky);
    if (const toml::node* n = t.get("center"))
        ic.center = point_of(*n, where + ".center");
    if (ic.kind == IcKind::Zero && t.size() > 1)
        throw ConfigError("'" + where + "': a zero initial condition takes no parameters");
    return ic;
}

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

std::string quoted(const std::string& s)
{
    std::ostringstream os;
    os << toml::value<std::string>(s);
    return os.str();
}

std::string point_text(Point2 p)
{
    return "[" + num(p.x) + ", " + num(p.y) + "]";
}

std::string points_text(const std::vector<Point2>& ps)
{
    std::string s = "[";
    for (std::size_t i = 0; i < ps.size(); ++i)
        s += (i ? ", " : "") + point_text(ps[i]);
    return s + "]";
}

void write_ic(std::ostream& os, const std::string& header, const InitialCondition& ic)
{
    os << "\n[" << header << "]\nkind = " << quoted(ic_name(ic.kind)) << "\n";
    if (ic.kind == IcKind::Zero)
        return;
    os << "decay = " << num(ic.decay) << "\ncenter = " << point_text(ic.center) << "\n";
    if (ic.kind == IcKind::Quadrupole)
        os << "kx = " << num(ic.kx) << "\n";
    if (ic.kind != IcKind::Gaussian)
        os << "ky = " << num(ic.ky) << "\n";
}

void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw ConfigError(msg);
}

} // namespace

void ExperimentConfig::validate() const
{
    require(!name.empty(), "'name' must not be empty");
    require(radius > 0.0, "'geometry.radius' must be positive");
    if (geometry == GeometryType::Srr) {
        require(alpha > 0.0 && alpha < std::numbers::pi, "'geometry.alpha' must lie in (0, pi)");
        require(std::isfinite(beta), "'geometry.beta' must be finite");
        require(centers.empty(), "'geometry.centers' only applies to cylinders");
    } else {
        require(!centers.empty(), "'geometry.centers' needs at least one cylinder");
    }
    try {
        Geometry g = geometry_value();
        if (auto* s = std::get_if<SrrGeometry>(&g))
            s->validate();
        else
            std::get<CylinderArray>(g).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
    require(half_width > 0.0, "'domain.half_width' must be positive");
    require(dx > 0.0, "'domain.dx' must be positive");
    if (quadrature == DomainQuadrature::Rect) {
        double cells = 2.0 * half_width / dx;
        require(std::abs(cells - std::round(cells)) < 1e-9 * cells, "'domain.dx' must divide 2 * half_width");
        require(mesh_path.empty(), "'domain.mesh' requires quadrature = \"mesh\"");
    } else {
        require(geometry == GeometryType::Cylinders || !mesh_path.empty(),
                "a mesh quadrature for the split ring needs 'domain.mesh'");
    }
    for (const auto& p : probes)
        require(std::isfinite(p.x) && std::isfinite(p.y), "'domain.probes' must be finite");
    require(omega_max > 0.0, "'frequency.omega_max' must be positive");
    require(n_base >= 1, "'frequency.n_base' must be at least 1");
    require(n_sol >= 1, "'truncation.n_sol' must be at least 1");
    require(n_aux >= 1, "'truncation.n_aux' must be at least 1");
    require(n_ker >= 1, "'truncation.n_ker' must be at least 1");
    require(n_inc >= 0, "'truncation.n_inc' must be non-negative");
    if (geometry == GeometryType::Srr)
        require(n_ker > 2 * n_sol, "'truncation.n_ker' must exceed 2 * n_sol");
    for (const auto* ic : {&f, &g}) {
        require(ic->kind != IcKind::Tabulated, "tabulated initial conditions are not configurable");
        require(ic->kind == IcKind::Zero || ic->decay > 0.0, "initial condition 'decay' must be positive");
    }
    require(!times.empty(), "'output.times' must list at least one time");
    for (double t : times)
        require(std::isfinite(t), "'output.times' must be finite");
    require(c > 0.0, "'physics.c' must be positive");
    require(rho0 > 0.0, "'physics.rho0' must be positive");
    require(search_re_min < search_re_max, "'resonances.re_min' must be below 're_max'");
    require(search_im_min < search_im_max && search_im_max <= 0.0,
            "'resonances' imaginary range must satisfy im_min < im_max <= 0");
    require(mesh_tol > 0.0, "'resonances.mesh_tol' must be positive");
    require(normalization_h > 0.0, "'sem.normalization_h' must be positive");
}

Geometry ExperimentConfig::geometry_value() const
{
    if (geometry == GeometryType::Srr)
        return SrrGeometry{radius, alpha, beta};
    return CylinderArray{radius, centers};
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin)
{
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << origin << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
        throw ConfigError(os.str());
    }
    reject_unknown(root,
                   {"name", "geometry", "domain", "frequency", "truncation", "initial", "output", "physics",
                    "resonances", "sem", "paths"},
                   "");
    ExperimentConfig c;
    read_string(root, "name", "name", c.name);

    const toml::table* geo = table_at(root, "geometry", "geometry");
    if (!geo)
        throw ConfigError("missing [geometry] table");
    reject_unknown(*geo, {"type", "radius", "alpha", "beta", "centers"}, "geometry");
    std::string type;
    read_string(*geo, "type", "geometry", type);
    if (type == "srr")
        c.geometry = GeometryType::Srr;
    else if (type == "cylinders")
        c.geometry = GeometryType::Cylinders;
    else
        throw ConfigError("'geometry.type' must be \"srr\" or \"cylinders\"");
    read_double(*geo, "radius", "geometry", c.radius);
    if (c.geometry == GeometryType::Cylinders && (geo->contains("alpha") || geo->contains("beta")))
        throw ConfigError("'geometry.alpha' and 'geometry.beta' only apply to the split ring");
    read_double(*geo, "alpha", "geometry", c.alpha);
    read_double(*geo, "beta", "geometry", c.beta);
    read_points(*geo, "centers", "geometry", c.centers);
    c.quadrature = c.geometry == GeometryType::Srr ? DomainQuadrature::Rect : DomainQuadrature::Mesh;

    if (const auto* t = table_at(root, "domain", "domain")) {
        reject_unknown(*t, {"half_width", "dx", "quadrature", "mesh", "probes"}, "domain");
        read_double(*t, "half_width", "domain", c.half_width);
        read_double(*t, "dx", "domain", c.dx);
        std::string q;
        read_string(*t, "quadrature", "domain", q);
        if (q == "rect")
            c.quadrature = DomainQuadrature::Rect;
        else if (q == "mesh")
            c.quadrature = DomainQuadrature::Mesh;
        else if (!q.empty())
            throw ConfigError("'domain.quadrature' must be \"rect\" or \"mesh\"");
        read_string(*t, "mesh", "domain", c.mesh_path);
        read_points(*t, "probes", "domain", c.probes);
    }
    if (const auto* t = table_at(root, "frequency", "frequency")) {
        reject_unknown(*t, {"omega_max", "n_base", "refine_resonances"}, "frequency");
        read_double(*t, "omega_max", "frequency", c.omega_max);
        read_int(*t, "n_base", "frequency", c.n_base);
        read_bool(*t, "refine_resonances", "frequency", c.refine_resonances);
    }
    if (const auto* t = table_at(root, "truncation", "truncation")) {
        reject_unknown(*t, {"n_sol", "n_aux", "n_ker", "n_inc"}, "truncation");
        read_int(*t, "n_sol", "truncation", c.n_sol);
        read_int(*t, "n_aux", "truncation", c.n_aux);
        read_int(*t, "n_ker", "truncation", c.n_ker);
        read_int(*t, "n_inc", "truncation", c.n_inc);
    }
    if (const auto* t = table_at(root, "initial", "initial")) {
        reject_unknown(*t, {"f", "g"}, "initial");
        if (const auto* ft = table_at(*t, "f", "initial.f"))
            c.f = read_ic(*ft, "initial.f");
        if (const auto* gt = table_at(*t, "g", "initial.g"))
            c.g = read_ic(*gt, "initial.g");
    }
    if (const auto* t = table_at(root, "output", "output")) {
        reject_unknown(*t, {"times", "eta"}, "output");
        read_doubles(*t, "times", "output", c.times);
        read_bool(*t, "eta", "output", c.eta);
    }
    if (const auto* t = table_at(root, "physics", "physics")) {
        reject_unknown(*t, {"c", "rho0"}, "physics");
        read_double(*t, "c", "physics", c.c);
        read_double(*t, "rho0", "physics", c.rho0);
    }
    if (const auto* t = table_at(root, "resonances", "resonances")) {
        reject_unknown(*t, {"re_min", "re_max", "im_min", "im_max", "mesh_tol"}, "resonances");
        read_double(*t, "re_min", "resonances", c.search_re_min);
        read_double(*t, "re_max", "resonances", c.search_re_max);
        read_double(*t, "im_min", "resonances", c.search_im_min);
        read_double(*t, "im_max", "resonances", c.search_im_max);
        read_double(*t, "mesh_tol", "resonances", c.mesh_tol);
    }
    if (const auto* t = table_at(root, "sem", "sem")) {
        reject_unknown(*t, {"normalization_h"}, "sem");
        read_double(*t, "normalization_h", "sem", c.normalization_h);
    }
    if (const auto* t = table_at(root, "paths", "paths")) {
        reject_unknown(*t, {"out_dir", "cache_dir"}, "paths");
        read_string(*t, "out_dir", "paths", c.out_dir);
        read_string(*t, "cache_dir", "paths", c.cache_dir);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& c)
{
    std::ostringstream os;
    os << "name = " << quoted(c.name) << "\n";

    os << "\n[geometry]\n";
    if (c.geometry == GeometryType::Srr) {
        os << "type = \"srr\"\nradius = " << num(c.radius) << "\nalpha = " << num(c.alpha) << "\nbeta = " << num(c.beta)
           << "\n";
    } else {
        os << "type = \"cylinders\"\nradius = " << num(c.radius) << "\ncenters = " << points_text(c.centers) << "\n";
    }

    os << "\n[domain]\nhalf_width = " << num(c.half_width) << "\ndx = " << num(c.dx) << "\nquadrature = "
       << (c.quadrature == DomainQuadrature::Rect ? "\"rect\"" : "\"mesh\"") << "\n";
    if (!c.mesh_path.empty())
        os << "mesh = " << quoted(c.mesh_path) << "\n";
    os << "probes = " << points_text(c.probes) << "\n";

    os << "\n[frequency]\nomega_max = " << num(c.omega_max) << "\nn_base = " << c.n_base
       << "\nrefine_resonances = " << (c.refine_resonances ? "true" : "false") << "\n";

    os << "\n[truncation]\nn_sol = " << c.n_sol << "\nn_aux = " << c.n_aux << "\nn_ker = " << c.n_ker
       << "\nn_inc = " << c.n_inc << "\n";

    write_ic(os, "initial.f", c.f);
    write_ic(os, "initial.g", c.g);

    os << "\n[output]\ntimes = [";
    for (std::size_t i = 0; i < c.times.size(); ++i)
        os << (i ? ", " : "") << num(c.times[i]);
    os << "]\neta = " << (c.eta ? "true" : "false") << "\n";

    os << "\n[physics]\nc = " << num(c.c) << "\nrho0 = " << num(c.rho0) << "\n";

    os << "\n[resonances]\nre_min = " << num(c.search_re_min) << "\nre_max = " << num(c.search_re_max)
       << "\nim_min = " << num(c.search_im_min) << "\nim_max = " << num(c.search_im_max)
       << "\nmesh_tol = " << num(c.mesh_tol) << "\n";

    os << "\n[sem]\nnormalization_h = " << num(c.normalization_h) << "\n";

    os << "\n[paths]\nout_dir = " << quoted(c.out_dir) << "\ncache_dir = " << quoted(c.cache_dir) << "\n";
    return os.str();
}

std::string config_hash(const ExperimentConfig& c)
{
    ExperimentConfig k = c;
    k.out_dir.clear();
    k.cache_dir.clear();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_config(k))));
    return buf;
}

std::vector<std::string> preset_names()
{
    return {"srr_gaussian", "srr_dipole", "srr_exterior", "cyl_gaussian", "cyl_quadrupole", "cyl_exterior"};
}

ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig c;
    c.name = name;
    c.n_inc = 10;
    c.n_base = 300;
    c.dx = 0.1;
    c.out_dir = "out/" + name;
    c.cache_dir = "cache";
    if (name.rfind("srr_", 0) == 0) {
        c.geometry = GeometryType::Srr;
        c.radius = 1.0;
        c.alpha = std::numbers::pi / 4;
        c.beta = std::numbers::pi;
        c.half_width = 5.0;
        c.quadrature = DomainQuadrature::Rect;
        c.omega_max = 15.0;
        c.n_sol = 60;
        c.n_aux = 30;
        c.n_ker = 2500;
        c.times = {0.0, 2.0, 4.0, 6.0, 8.0};
        c.search_re_min = 0.1;
        c.search_re_max = 15.0;
        if (name == "srr_gaussian")
            c.f = InitialCondition::gaussian(2.0);
        else if (name == "srr_dipole")
            c.f = InitialCondition::dipole(2.0, 1.0);
        else if (name == "srr_exterior")
            c.f = InitialCondition::gaussian(2.0, {-2.5, -2.5});
        else
            throw ConfigError("unknown preset '" + name + "'");
    } else if (name.rfind("cyl_", 0) == 0) {
        c.geometry = GeometryType::Cylinders;
        c.radius = 0.33;
        c.centers = {{0.5, 0.5}, {-0.5, 0.5}, {0.5, -0.5}, {-0.5, -0.5}};
        c.half_width = 2.0;
        c.quadrature = DomainQuadrature::Mesh;
        c.omega_max = 20.0;
        c.n_sol = 30;
        c.times = {0.0, 1.5, 3.0, 4.5, 6.0};
        c.search_re_min = 0.1;
        c.search_re_max = 20.0;
        if (name == "cyl_gaussian")
            c.f = InitialCondition::gaussian(10.0);
        else if (name == "cyl_quadrupole")
            c.f = InitialCondition::quadrupole(10.0, 3.0, 3.0);
        else if (name == "cyl_exterior")
            c.f = InitialCondition::gaussian(10.0, {-1.5, 0.0});
        else
            throw ConfigError("unknown preset '" + name + "'");
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    c.probes = {{0.0, 0.0}};
    if (!(c.f.center == Point2{}))
        c.probes.push_back(c.f.center);
    c.validate();
    return c;
}

} // namespace wavescat
