#include "pkslab/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

namespace pkslab {

namespace {
const double kSqrt2 = std::sqrt(2.0);

double cubic_coeff(const OdeParams& p) {
    return 4.0 * kSqrt2 * M_PI * M_PI * (2.0 * kSqrt2 - p.c1) / (27.0 * std::pow(p.m1, 4));
}
}  // namespace

void OdeParams::validate() const {
    if (!(A >= 1.0)) throw OdeDomainError("ode: A must be >= 1");
    if (!(m1 >= 0.0)) throw OdeDomainError("ode: M1 must be >= 0");
    if (!(c1 > 0.0 && c1 < 2.0 * kSqrt2)) throw OdeDomainError("ode: c1 must lie in (0, 2 sqrt 2)");
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw OdeDomainError("ode: eps1 must lie in (0, 1)");
    if (!(ghat_bound >= 0.0)) throw OdeDomainError("ode: ghat_bound must be >= 0");
}

OdeParams ode_params(const SimConfig& cfg) {
    OdeParams p;
    p.A = cfg.ode.A;
    p.m1 = cfg.ode.m1;
    p.c1 = cfg.ode.c1;
    p.eps1 = cfg.ode.eps1;
    p.ghat_bound = cfg.ode.ghat_bound;
    return p;
}

double ode_H(double h, const OdeParams& p) {
    if (p.m1 == 0.0) return h == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -(1.0 / p.A) * (cubic_coeff(p) * h * h * h - h * h / (2.0 * kSqrt2 * p.c1));
}

double ode_dH(double h, const OdeParams& p) {
    return -(1.0 / p.A) * (3.0 * cubic_coeff(p) * h * h - h / (kSqrt2 * p.c1));
}

double ode_rhs(double h, const OdeParams& p) {
    if (h < 0.0) throw OdeDomainError("ode_rhs: h = " + fmt_double(h) + " < 0");
    return 2.0 * ode_H(h, p);
}

Equilibrium equilibrium(const OdeParams& p) {
    Equilibrium e;
    if (p.m1 == 0.0) {
        e.degenerate = true;
        return e;
    }
    const double m4 = std::pow(p.m1, 4);
    e.h_star = 27.0 * m4 / (16.0 * M_PI * M_PI * (2.0 * kSqrt2 - p.c1) * p.c1);
    const double d = 2.0 * kSqrt2 - p.c1 - 0.5 * kSqrt2 * p.eps1;
    e.h_2star = d > 0.0 ? 9.0 * m4 / (8.0 * M_PI * M_PI * d * p.c1) : std::numeric_limits<double>::infinity();
    e.stable = ode_dH(e.h_star, p) < 0.0;
    return e;
}

double default_horizon(double h0, const OdeParams& p) {
    Equilibrium e = equilibrium(p);
    if (e.degenerate) return 1.0;
    // linear relaxation rate at h*, plus the escape time from a small h0
    const double lam = -2.0 * ode_dH(e.h_star, p);
    double T = 40.0 / lam;
    if (h0 > 0.0 && h0 < e.h_star) T += 4.0 * kSqrt2 * p.c1 * p.A / h0;
    return std::min(T, 1e8 * p.A);
}

OdeTrajectory integrate_ode(double h0, const OdeParams& p, double t_max, const OdeForcing& forcing,
                            double max_dt) {
    namespace odeint = boost::numeric::odeint;
    p.validate();
    if (h0 < 0.0) throw OdeDomainError("integrate: h0 = " + fmt_double(h0) + " < 0");
    OdeTrajectory tr;
    tr.eq = equilibrium(p);
    if (t_max <= 0.0) t_max = default_horizon(h0, p);

    using State = std::array<double, 1>;
    auto sys = [&](const State& x, State& dx, double t) {
        // round-off can carry the state a hair below 0; the field is continuous there
        const double h = std::max(x[0], 0.0);
        dx[0] = (p.m1 == 0.0 ? 0.0 : 2.0 * ode_H(h, p)) + (forcing ? forcing(t) : 0.0);
    };
    auto obs = [&](const State& x, double t) {
        tr.t.push_back(t);
        tr.h.push_back(x[0]);
    };
    State x{h0};
    using Stepper = odeint::runge_kutta_dopri5<State>;
    // Past dt ~ 1/lambda the explicit pair leaves its stability region near h* and the error
    // controller lets h wander around the equilibrium at tolerance level; cap the step there.
    if (!tr.eq.degenerate) {
        const double lam = -2.0 * ode_dH(tr.eq.h_star, p);
        if (lam > 0.0) max_dt = max_dt > 0.0 ? std::min(max_dt, 1.0 / lam) : 1.0 / lam;
    }
    if (!(max_dt > 0.0)) max_dt = t_max;
    const double dt0 = std::min(t_max * 1e-6, max_dt);
    auto stepper = odeint::make_controlled(1e-10, 1e-8, max_dt, Stepper());
    try {
        odeint::integrate_adaptive(stepper, sys, x, 0.0, t_max, dt0, obs);
    } catch (const odeint::step_adjustment_error& e) {
        throw std::runtime_error(std::string("integrate: step-size underflow: ") + e.what());
    }
    tr.sup = *std::max_element(tr.h.begin(), tr.h.end());
    tr.inf = *std::min_element(tr.h.begin(), tr.h.end());
    return tr;
}

double perturbed_bound(double h0, const OdeParams& p) {
    if (p.ghat_bound > p.eps1)
        throw OdeDomainError("perturbed_bound: ghat_bound " + fmt_double(p.ghat_bound) + " exceeds eps1 " +
                             fmt_double(p.eps1));
    const double base = 27.0 * std::pow(p.m1, 4) / (32.0 * M_PI * M_PI);
    return std::max(h0 + p.eps1, base * (1.0 + p.eps1) + p.eps1);
}

double PulseForcing::operator()(double t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double z = (t - at[i]) / width[i];
        s += weight[i] * std::exp(-0.5 * z * z) / (width[i] * std::sqrt(2.0 * M_PI));
    }
    return s;
}

double PulseForcing::total() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
}

double PulseForcing::min_width() const {
    return width.empty() ? 0.0 : *std::min_element(width.begin(), width.end());
}

std::vector<PortraitSample> phase_portrait_grid(const OdeParams& p, double h_lo, double h_hi, int n_samples,
                                                const std::vector<double>& levels) {
    if (!(h_lo >= 0.0) || !(h_hi > h_lo)) throw OdeDomainError("phase_portrait_grid: need 0 <= h_lo < h_hi");
    if (n_samples < 2) throw OdeDomainError("phase_portrait_grid: need at least 2 samples");
    std::vector<PortraitSample> out;
    std::vector<double> cs = levels;
    const Equilibrium e = equilibrium(p);
    if (cs.empty()) {
        // negative levels scaled to the depth of H on [0, h*]
        const double scale = std::abs(ode_H(2.0 * e.h_star / 3.0, p));
        for (double f : {0.25, 0.5, 1.0, 2.0}) cs.push_back(-f * (scale > 0.0 ? scale : 1.0));
    }
    for (int i = 0; i < n_samples; ++i) {
        const double h = h_lo + (h_hi - h_lo) * i / (n_samples - 1);
        out.push_back({"field", 0.0, h, 2.0 * ode_H(h, p)});
    }
    for (double c : cs)
        for (int i = 0; i < n_samples; ++i) {
            const double h = h_lo + (h_hi - h_lo) * i / (n_samples - 1);
            out.push_back({"level", c, h, 2.0 * (ode_H(h, p) + c)});
        }
    out.push_back({"equilibrium", 0.0, e.h_star, 0.0});
    return out;
}

std::string to_string(MassClass m) { return m == MassClass::below ? "below" : "above"; }

double mass_threshold() { return 24.0 * M_PI * M_PI / 5.0; }

MassClass mass_threshold_check(double M) {
    if (M < 0.0) throw std::invalid_argument("mass_threshold_check: M < 0");
    return M < mass_threshold() ? MassClass::below : MassClass::above;
}

}  // namespace pkslab
