#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "pkslab/config.hpp"
#include "pkslab/random.hpp"
#include "pkslab/spectral.hpp"

namespace pkslab {

enum class FieldClass { generic, x_mean_free, divergence_free, nonnegative };

struct EnsembleSpec {
    int count = 100;
    int nx = 16, ny = 64, nz = 16;
    double ly = 4.0;
    int n1d = 512;
    double decay = 2.0;
    std::uint64_t seed = 7;
    double alpha = 0.75;
    double cap = 100.0;
};
EnsembleSpec ensemble_spec(const SimConfig& cfg);

struct CheckResult {
    std::string name;
    bool asserted = true;  // false: ratio reported against the cap only
    bool pass = true;
    double worst = 0.0;    // worst LHS/RHS, or worst relative defect for identities
    std::string worst_at;
    double tolerance = 0.0;
    int samples = 0;
    std::string note;
};

struct VerificationReport {
    std::string suite;
    std::vector<CheckResult> checks;
    bool pass() const;
    void merge(const VerificationReport& o);
};

// --- ensembles -------------------------------------------------------------
// samples of a localized function on [-pi*ly, pi*ly), n1d points
std::vector<double> line_field(Rng& rng, const EnsembleSpec& spec, bool nonnegative);
SpectralScalar random_field(const GridPtr& g, Rng& rng, double decay, FieldClass cls);
// random u_neq with div_L u = 0 at the given shear
SpectralVector random_divfree(const GridPtr& g, Rng& rng, double decay, double shear = 0.0);

struct LineNorms {
    double l1 = 0.0, l2 = 0.0, linf = 0.0, d1 = 0.0;  // d1 = |h'|_2
};
LineNorms line_norms(const std::vector<double>& h, double length);
double gn_ratio(const LineNorms& n);    // |h|_inf / (|h|_2 |h'|_2)^{1/2}
double nash_ratio(const LineNorms& n);  // |h|_2 / ((16 pi^2/27)^{-1/6} |h|_1^{2/3} |h'|_2^{1/3})
double nash_constant();

VerificationReport check_gn_1d(const EnsembleSpec& spec);
VerificationReport check_nash_1d(const EnsembleSpec& spec);
VerificationReport check_elliptic_identities(const EnsembleSpec& spec);
VerificationReport check_velocity_identities(const EnsembleSpec& spec);
VerificationReport check_aniso_ratios(const EnsembleSpec& spec);

// --- sheared heat kernel ---------------------------------------------------
double kernel_r(double k1, double k2, double k3, double t);
double kernel_r1(double k1, double k2, double k3, double t);
double kernel_r1_quadrature(double k1, double k2, double k3, double t);
// max_{x>=0} (b+1) A^{-1/3} x - k1^2 x^3 / (12 A)
double affine_constant(double k1, double A, double b);
double affine_argmax(double k1, double A, double b);

struct KernelRow {
    double t = 0.0, r1 = 0.0, amplitude = 0.0, bound = 0.0;
};
std::vector<KernelRow> kernel_table(double k1, double k2, double k3, double A, double b,
                                    const std::vector<double>& t);
// t-grid values must be dyadic rationals and k2 a dyadic rational for the exact cubic check
VerificationReport kernel_decay_check(double k1, double k2, double k3, double A, double b,
                                      const std::vector<double>& t);
VerificationReport kernel_suite(const EnsembleSpec& spec, const KernelConfig& kc, int modes = 50);

// --- forced mode ODE  d_t f + A^{-1} r(t) f = i k1 f1 + f2 --------------------
struct Pulse {
    std::complex<double> amp;
    double at = 0.0, width = 1.0;
};
struct ModeForcing {
    std::complex<double> f0 = 1.0;
    std::vector<Pulse> f1, f2;
};
struct ZbNorms {
    double sup = 0.0, l2 = 0.0, gil = 0.0, grad = 0.0;  // the four Z_b pieces, squared and weighted
    double lhs = 0.0, rhs = 0.0;
    double ratio() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
};
ZbNorms spacetime_norms(double k1, double k2, double k3, double A, double b, double T, const ModeForcing& f,
                        int nfine = 20000);
VerificationReport check_spacetime_bound(double k1, double k2, double k3, const std::vector<double>& As, double b,
                                         double T, int samples, std::uint64_t seed, double cap);

// suites: gn, nash, elliptic, velocity, aniso, kernel, spacetime, all
VerificationReport run_suite(const std::string& name, const SimConfig& cfg);
std::vector<std::string> suite_names();

}  // namespace pkslab
