#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pkslab {

struct GridConfig {
    int nx = 48, ny = 96, nz = 48;
    double ly = 4.0;
    double dealias = 2.0 / 3.0;
};

struct PhysConfig {
    double A = 1000.0;
    double a = 0.1;      // X_a weight
    double eps0 = 0.4;
};

struct SolverConfig {
    double cfl = 0.4;
    double dt_max = 0.25;
    double dt_min = 1e-9;
    double t_max = 10.0;
    int stride = 1;
    double max_horizons = 10.0;
    double positivity_tol = 1e-6;
    double tail_limit = 0.1;
    double blowup_factor = 50.0;
    bool clip = false;
    long max_steps = 2000000;
};

struct InitConfig {
    std::string kind = "bump";  // bump | bump_plus_xmode | random_bandlimited
    double mass = 1.0;
    double width = 1.0;         // Gaussian width in y
    double width_xz = 0.0;      // von Mises width in x,z (0 = uniform)
    double xmode_amp = 0.5;
    int modes = 6;              // random_bandlimited: number of (x,z) harmonics
    int kmax = 3;
    double u_amp = 0.0;         // H^2 norm of u_in
    std::uint64_t seed = 1;
};

struct ModelConfig {
    bool couette = true;
    bool nonlinear = true;
    bool diffusion = true;
    bool buoyancy = true;
    bool liftup_split = true;
};

struct FitConfig {
    double t_min = 1.0;
    double upper = 0.9;
    double lower = 0.01;
};

struct OdeConfig {
    double A = 1.0;
    double m1 = 1.0;
    double c1 = 1.4142135623730951;
    double eps1 = 0.1;
    double ghat_bound = 0.0;
    double h0 = 0.0;
    double t_max = 0.0;  // 0: pick from the relaxation time
    int portrait_samples = 200;
};

struct VerifyConfig {
    int count = 100;
    std::uint64_t seed = 7;
    double decay = 2.0;
    double cap = 100.0;
    double alpha = 0.75;
    int n1d = 512;
    double ly = 4.0;
    int nx = 16, ny = 64, nz = 16;
};

struct KernelConfig {
    double k1 = 1.0, k2 = 0.0, k3 = 0.0;
    double A = 1000.0;
    double b = 1.0;
    double t_max = 50.0;
    int nt = 201;
};

struct SimConfig {
    GridConfig grid;
    PhysConfig phys;
    SolverConfig solver;
    InitConfig init;
    ModelConfig model;
    FitConfig fit;
    OdeConfig ode;
    VerifyConfig verify;
    KernelConfig kernel;

    // epsilon = eps0 on (1/3, 4/9], capped at 4/9 above
    double epsilon() const;
    void validate() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownKey : ConfigError {
    using ConfigError::ConfigError;
};
struct MissingFile : ConfigError {
    using ConfigError::ConfigError;
};
struct TypeError : ConfigError {
    using ConfigError::ConfigError;
};

// Flat "section.key = value" text. '#' starts a comment. Strings are quoted.
void apply_setting(SimConfig& cfg, const std::string& key, const std::string& value);
void apply_text(SimConfig& cfg, const std::string& text, const std::string& origin = "<inline>");
SimConfig parse_config_file(const std::string& path, const SimConfig& base = SimConfig{});
SimConfig parse_config_pairs(const std::vector<std::string>& pairs, const SimConfig& base = SimConfig{});
std::string emit_config(const SimConfig& cfg);
std::vector<std::string> config_keys();
std::string get_setting(const SimConfig& cfg, const std::string& key);
std::map<std::string, std::string> config_map(const SimConfig& cfg);

// shortest round-trip decimal
std::string fmt_double(double v);

}  // namespace pkslab
