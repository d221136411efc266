#include "pkslab/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace pkslab {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // no "-0" in the csv files
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

enum class Kind { Int, Double, Bool, String, U64 };

struct Entry {
    std::string key;
    Kind kind;
    std::function<void(SimConfig&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* what) {
    throw TypeError("config key '" + key + "': expected " + what + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, "a real number");
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, "an integer");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, "a nonnegative integer");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    bad(key, v, "true or false");
}

std::string to_string_value(const std::string& key, const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    // bare identifiers are accepted too, which keeps --set init.kind=bump usable from a shell
    bool bare = !v.empty();
    for (char ch : v) bare = bare && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
    if (bare) return v;
    bad(key, v, "a quoted string");
}

#define PK_D(name, member) \
    Entry{name, Kind::Double, [](SimConfig& c, const std::string& v) { c.member = to_double(name, v); }, \
          [](const SimConfig& c) { return fmt_double(c.member); }}
#define PK_I(name, member) \
    Entry{name, Kind::Int, [](SimConfig& c, const std::string& v) { c.member = static_cast<decltype(c.member)>(to_int(name, v)); }, \
          [](const SimConfig& c) { return std::to_string(c.member); }}
#define PK_U(name, member) \
    Entry{name, Kind::U64, [](SimConfig& c, const std::string& v) { c.member = to_u64(name, v); }, \
          [](const SimConfig& c) { return std::to_string(c.member); }}
#define PK_B(name, member) \
    Entry{name, Kind::Bool, [](SimConfig& c, const std::string& v) { c.member = to_bool(name, v); }, \
          [](const SimConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define PK_S(name, member) \
    Entry{name, Kind::String, [](SimConfig& c, const std::string& v) { c.member = to_string_value(name, v); }, \
          [](const SimConfig& c) { return "\"" + c.member + "\""; }}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> r = {
        PK_I("grid.nx", grid.nx),
        PK_I("grid.ny", grid.ny),
        PK_I("grid.nz", grid.nz),
        PK_D("grid.ly", grid.ly),
        PK_D("grid.dealias", grid.dealias),
        PK_D("phys.A", phys.A),
        PK_D("phys.a", phys.a),
        PK_D("phys.eps0", phys.eps0),
        PK_D("solver.cfl", solver.cfl),
        PK_D("solver.dt_max", solver.dt_max),
        PK_D("solver.dt_min", solver.dt_min),
        PK_D("solver.t_max", solver.t_max),
        PK_I("solver.stride", solver.stride),
        PK_D("solver.max_horizons", solver.max_horizons),
        PK_D("solver.positivity_tol", solver.positivity_tol),
        PK_D("solver.tail_limit", solver.tail_limit),
        PK_D("solver.blowup_factor", solver.blowup_factor),
        PK_B("solver.clip", solver.clip),
        PK_I("solver.max_steps", solver.max_steps),
        PK_S("init.kind", init.kind),
        PK_D("init.mass", init.mass),
        PK_D("init.width", init.width),
        PK_D("init.width_xz", init.width_xz),
        PK_D("init.xmode_amp", init.xmode_amp),
        PK_I("init.modes", init.modes),
        PK_I("init.kmax", init.kmax),
        PK_D("init.u_amp", init.u_amp),
        PK_U("init.seed", init.seed),
        PK_B("model.couette", model.couette),
        PK_B("model.nonlinear", model.nonlinear),
        PK_B("model.diffusion", model.diffusion),
        PK_B("model.buoyancy", model.buoyancy),
        PK_B("model.liftup_split", model.liftup_split),
        PK_D("fit.t_min", fit.t_min),
        PK_D("fit.upper", fit.upper),
        PK_D("fit.lower", fit.lower),
        PK_D("ode.A", ode.A),
        PK_D("ode.m1", ode.m1),
        PK_D("ode.c1", ode.c1),
        PK_D("ode.eps1", ode.eps1),
        PK_D("ode.ghat_bound", ode.ghat_bound),
        PK_D("ode.h0", ode.h0),
        PK_D("ode.t_max", ode.t_max),
        PK_I("ode.portrait_samples", ode.portrait_samples),
        PK_I("verify.count", verify.count),
        PK_U("verify.seed", verify.seed),
        PK_D("verify.decay", verify.decay),
        PK_D("verify.cap", verify.cap),
        PK_D("verify.alpha", verify.alpha),
        PK_I("verify.n1d", verify.n1d),
        PK_D("verify.ly", verify.ly),
        PK_I("verify.nx", verify.nx),
        PK_I("verify.ny", verify.ny),
        PK_I("verify.nz", verify.nz),
        PK_D("kernel.k1", kernel.k1),
        PK_D("kernel.k2", kernel.k2),
        PK_D("kernel.k3", kernel.k3),
        PK_D("kernel.A", kernel.A),
        PK_D("kernel.b", kernel.b),
        PK_D("kernel.t_max", kernel.t_max),
        PK_I("kernel.nt", kernel.nt),
    };
    return r;
}

#undef PK_D
#undef PK_I
#undef PK_U
#undef PK_B
#undef PK_S

const Entry& find(const std::string& key) {
    for (const auto& e : registry())
        if (e.key == key) return e;
    throw UnknownKey("unknown config key '" + key + "'");
}

}  // namespace

double SimConfig::epsilon() const { return phys.eps0 > 4.0 / 9.0 ? 4.0 / 9.0 : phys.eps0; }

void SimConfig::validate() const {
    auto req = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    req(phys.A >= 1.0, "phys.A must be >= 1");
    req(phys.a > 0.0, "phys.a must be > 0");
    req(phys.eps0 > 1.0 / 3.0, "phys.eps0 must exceed 1/3");
    req(solver.cfl > 0.0, "solver.cfl must be > 0");
    req(solver.dt_max > 0.0, "solver.dt_max must be > 0");
    req(solver.dt_min > 0.0, "solver.dt_min must be > 0");
    req(solver.t_max >= 0.0, "solver.t_max must be >= 0");
    req(solver.stride >= 1, "solver.stride must be >= 1");
    req(solver.max_horizons > 0.0, "solver.max_horizons must be > 0");
    req(solver.blowup_factor > 1.0, "solver.blowup_factor must be > 1");
    req(solver.tail_limit > 0.0 && solver.tail_limit <= 1.0, "solver.tail_limit must lie in (0,1]");
    req(init.kind == "bump" || init.kind == "bump_plus_xmode" || init.kind == "random_bandlimited",
        "init.kind must be bump, bump_plus_xmode or random_bandlimited");
    req(init.mass > 0.0, "init.mass must be > 0");
    req(init.width > 0.0, "init.width must be > 0");
    req(init.width_xz >= 0.0, "init.width_xz must be >= 0");
    req(init.xmode_amp >= 0.0 && init.xmode_amp <= 1.0, "init.xmode_amp must lie in [0,1]");
    req(init.modes >= 1 && init.kmax >= 1, "init.modes and init.kmax must be >= 1");
    req(init.u_amp >= 0.0, "init.u_amp must be >= 0");
    req(fit.lower > 0.0 && fit.lower < fit.upper, "fit.lower must lie in (0, fit.upper)");
}

void apply_setting(SimConfig& cfg, const std::string& key, const std::string& value) {
    find(key).set(cfg, trim(value));
}

void apply_text(SimConfig& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // comments outside quotes
        bool q = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') q = !q;
            if (line[i] == '#' && !q) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

SimConfig parse_config_file(const std::string& path, const SimConfig& base) {
    std::ifstream f(path);
    if (!f) throw MissingFile("config file not found: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    SimConfig cfg = base;
    apply_text(cfg, ss.str(), path);
    return cfg;
}

SimConfig parse_config_pairs(const std::vector<std::string>& pairs, const SimConfig& base) {
    SimConfig cfg = base;
    for (const auto& p : pairs) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + p + "'");
        apply_setting(cfg, trim(p.substr(0, eq)), trim(p.substr(eq + 1)));
    }
    return cfg;
}

std::string emit_config(const SimConfig& cfg) {
    std::string out;
    for (const auto& e : registry()) out += e.key + " = " + e.get(cfg) + "\n";
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> k;
    for (const auto& e : registry()) k.push_back(e.key);
    return k;
}

std::string get_setting(const SimConfig& cfg, const std::string& key) { return find(key).get(cfg); }

std::map<std::string, std::string> config_map(const SimConfig& cfg) {
    std::map<std::string, std::string> m;
    for (const auto& e : registry()) m[e.key] = e.get(cfg);
    return m;
}

}  // namespace pkslab
