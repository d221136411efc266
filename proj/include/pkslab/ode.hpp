#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkslab/config.hpp"

namespace pkslab {

struct OdeParams {
    double A = 1.0;
    double m1 = 1.0;  // zonal mass M / (4 pi^2)
    double c1 = 1.4142135623730951;
    double eps1 = 0.1;
    double ghat_bound = 0.0;

    void validate() const;
};

OdeParams ode_params(const SimConfig& cfg);

struct OdeDomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// H(h) = -(1/A) [ 4 sqrt2 pi^2 (2 sqrt2 - c1) / (27 M1^4) h^3 - h^2 / (2 sqrt2 c1) ]
double ode_H(double h, const OdeParams& p);
double ode_dH(double h, const OdeParams& p);
// dh/dt = 2 H(h); throws OdeDomainError for h < 0
double ode_rhs(double h, const OdeParams& p);

struct Equilibrium {
    double h_star = 0.0;   // largest root of H
    double h_2star = 0.0;  // stagnation point of the eps1-perturbed problem
    bool stable = false;
    bool degenerate = false;  // M1 = 0
};
Equilibrium equilibrium(const OdeParams& p);

struct OdeTrajectory {
    std::vector<double> t, h;
    Equilibrium eq;
    double sup = 0.0;
    double inf = 0.0;
};

// additive forcing G'(t) entering dh/dt = 2H(h) + G'(t)
using OdeForcing = std::function<double(double)>;

// Adaptive Dormand-Prince 5(4), atol 1e-10, rtol 1e-8. t_max <= 0 picks a relaxation horizon.
OdeTrajectory integrate_ode(double h0, const OdeParams& p, double t_max = 0.0, const OdeForcing& forcing = {},
                            double max_dt = 0.0);
double default_horizon(double h0, const OdeParams& p);

// max{h0 + eps1, 27 M1^4 / (32 pi^2) (1 + eps1) + eps1}; throws if ghat_bound > eps1
double perturbed_bound(double h0, const OdeParams& p);

// Gaussian pulses with non-negative weights of total integral <= ghat_bound
struct PulseForcing {
    std::vector<double> at, width, weight;
    double operator()(double t) const;
    double total() const;
    double min_width() const;
};

struct PortraitSample {
    std::string kind;  // "field", "level", "equilibrium"
    double level = 0.0;
    double h = 0.0;
    double dhdt = 0.0;
};
// (h, dh/dt) along dh/dt = 2H(h), level curves of (1/2) p - H(h) = c for c < 0, and the marker (h*, 0)
std::vector<PortraitSample> phase_portrait_grid(const OdeParams& p, double h_lo, double h_hi, int n_samples,
                                                const std::vector<double>& levels = {});

enum class MassClass { below, above };
std::string to_string(MassClass m);
double mass_threshold();  // 24 pi^2 / 5
MassClass mass_threshold_check(double M);

}  // namespace pkslab
