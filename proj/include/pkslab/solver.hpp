#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pkslab/config.hpp"
#include "pkslab/spectral.hpp"

namespace pkslab {

enum class Status { running, finished, blowup, unresolved };
std::string to_string(Status s);

// Sheared coordinates X = x - t y. With the Couette flow switched off the frame is frozen.
struct ShearFrame {
    double t = 0.0;
    bool couette = true;
    double shear() const { return couette ? t : 0.0; }
    double k2(const Grid& g, int i, int j) const { return eff_k2(g, i, j, shear()); }
    double max_abs_k2(const Grid& g) const { return g.k2_band() + std::abs(shear()) * g.kmax_x; }
};

// Companion (y,z) fields for the split u_{1,0} = hat + tilde, stored like the k1 = 0 plane.
struct LiftUpSplit {
    bool enabled = false;
    std::vector<cplx> hat, tilde;
};

struct Pressures {
    SpectralScalar p1, p2, p3;
};

struct SimState {
    double t = 0.0;
    SpectralScalar n;
    SpectralVector u;
    SpectralScalar c;
    LiftUpSplit split;
    Status status = Status::running;
    std::string reason;
    long steps = 0;
    long clip_events = 0;
    long positivity_events = 0;    // steps ending with min n < -tol max(|n|_inf, 1)
    double worst_negativity = 0.0;  // max over steps of -min n / max(|n|_inf, 1)
    double dt_hint = 0.0;
    bool couette = true;

    ShearFrame frame() const { return {t, couette}; }
    double shear() const { return couette ? t : 0.0; }
};

struct StepRejected : std::runtime_error {
    double dt_limit;
    StepRejected(const std::string& m, double lim) : std::runtime_error(m), dt_limit(lim) {}
};

struct Unresolved : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Tendency {
    SpectralScalar dn;
    SpectralVector du;
};

class Solver {
public:
    explicit Solver(const SimConfig& cfg);

    const SimConfig& config() const { return cfg_; }
    const GridPtr& grid() const { return grid_; }

    SimState init_state() const;
    Tendency tendency(const SimState& s) const;
    SimState step(const SimState& s, double dt) const;
    double dt_limit(double t, double vmax) const;
    // velocity scale used by the CFL rule: |u|_inf + |grad_L c|_inf
    double velocity_scale(const SimState& s) const;
    // shear-band horizon: largest retained |k2| divided by the unit shear rate
    double band_horizon() const { return grid_->k2_band(); }
    void refresh_c(SimState& s) const;

    struct Fields {
        std::vector<cplx> n, u1, u2, u3, hat, tilde;
    };
    struct Stage {
        Fields d;
        double vmax = 0.0;
    };
    void eval(const Fields& f, double t, Stage& out) const;

private:
    SimConfig cfg_;
    GridPtr grid_;
    Fft2d fft2_;

    struct Work {
        std::vector<double> np, u[3], gc[3], prod;
        std::vector<cplx> spec, scratch, tmp;
        std::vector<cplx> ph[6];  // products u_i u_j: 11 12 13 22 23 33
        std::vector<cplx> q[3];   // density fluxes
        std::vector<double> y2[6];
        std::vector<cplx> s2[6];
    };
    mutable Work w_;
    void eval_split(const Fields& f, Stage& out) const;
};

// Free-function forms of the operations.
SimState init_state(const SimConfig& cfg);
Pressures compute_pressures(const SimState& s, double A);
Tendency tendency(const SimState& s, const SimConfig& cfg);
SimState step(const SimState& s, double dt, const SimConfig& cfg);

// Blow-up criterion functional A^{-1/12}|grad u| + |(dxx, dzz) n| + |n|_inf
double blowup_functional(const SimState& s, double A);
double tail_fraction(const SpectralScalar& f);
// running unless the functional exceeds factor x reference; unresolved on a heavy spectral tail
Status detect_blowup(const SimState& s, const SimConfig& cfg, double reference_functional);

// closed-form r1(b) - r1(a) for one mode, stable for large t
double r1_increment(double k1, double k2, double k3, double a, double b);

}  // namespace pkslab
