#include "pkslab/run.hpp"

#include <algorithm>
#include <cmath>

namespace pkslab {

RunResult run_simulation(const SimConfig& cfg, const RecordSink& sink) {
    Solver solver(cfg);
    RunResult res;
    res.ledger = make_ledger(cfg.phys.A, cfg.phys.a, cfg.phys.eps0);

    SimState s = solver.init_state();
    res.initial_functional = blowup_functional(s, cfg.phys.A);
    res.mass0 = integral(s.n);

    double last_recorded = -1.0;
    auto record = [&](const SimState& st) {
        NormRecord r = instantaneous_norms(st, cfg);
        r.status = to_string(res.status == Status::running && st.t < cfg.solver.t_max ? Status::running : res.status);
        update_ledger(res.ledger, r);
        const double drift = res.mass0 != 0.0 ? std::abs(r.mass - res.mass0) / std::abs(res.mass0) : std::abs(r.mass);
        res.mass_drift = std::max(res.mass_drift, drift);
        res.max_div_res = std::max(res.max_div_res, r.div_res);
        res.max_pythagoras = std::max(res.max_pythagoras, pythagoras_defect(r));
        res.max_velocity_identity = std::max(res.max_velocity_identity, velocity_identity_defect(r));
        res.max_split_residual = std::max(res.max_split_residual, r.split_residual);
        if (res.initial_functional > 0.0)
            res.max_functional_ratio = std::max(res.max_functional_ratio, r.blowup_functional / res.initial_functional);
        res.records.push_back(r);
        last_recorded = st.t;
        if (sink) sink(res.records.back());
    };

    const double t_max = cfg.solver.t_max;
    const double tiny = 1e-12 * std::max(1.0, t_max);
    if (t_max <= tiny) res.status = Status::finished;
    record(s);
    res.initial_n_linf = res.records.front().n_linf;

    double dt = std::min(cfg.solver.dt_max, solver.dt_limit(s.t, solver.velocity_scale(s)));
    while (res.status == Status::running) {
        if (s.steps >= cfg.solver.max_steps) {
            res.status = Status::unresolved;
            res.reason = "step budget exhausted";
            break;
        }
        const double remaining = t_max - s.t;
        const bool last = dt >= remaining - tiny;
        const double h = last ? remaining : dt;
        SimState next;
        try {
            next = solver.step(s, h);
        } catch (const StepRejected& e) {
            ++res.rejected;
            dt = std::min(0.5 * h, e.dt_limit);
            if (dt < cfg.solver.dt_min) {
                res.status = Status::unresolved;
                res.reason = "time step underflow (" + fmt_double(dt) + ")";
            }
            continue;
        } catch (const Unresolved& e) {
            res.status = Status::unresolved;
            res.reason = e.what();
            break;
        }
        if (last) next.t = t_max;
        const double prev_hint = s.dt_hint;
        s = std::move(next);
        // extrapolate a shrinking CFL limit one step ahead to avoid a rejection per step
        const double trend = prev_hint > 0.0 ? std::min(1.0, s.dt_hint / prev_hint) : 1.0;
        dt = std::min(cfg.solver.dt_max, s.dt_hint * trend * trend);
        if (last) res.status = Status::finished;
        if (last || s.steps % cfg.solver.stride == 0) {
            Status d = detect_blowup(s, cfg, res.initial_functional);
            if (d == Status::blowup) {
                res.status = Status::blowup;
                res.reason = "criterion functional above " + fmt_double(cfg.solver.blowup_factor) + "x initial";
            } else if (d == Status::unresolved) {
                res.status = Status::unresolved;
                res.reason = "spectral tail";
            }
            record(s);
        }
    }
    if (last_recorded != s.t) record(s);
    s.status = res.status;
    s.reason = res.reason;
    res.records.back().status = to_string(res.status);
    res.steps = s.steps;
    res.positivity_events = s.positivity_events;
    res.clip_events = s.clip_events;
    res.worst_negativity = s.worst_negativity;
    res.final_state = std::move(s);

    std::vector<double> t, v;
    for (const auto& r : res.records) {
        t.push_back(r.t);
        v.push_back(r.nneq_l2);
    }
    try {
        FitOptions opt;
        opt.t_min = cfg.fit.t_min;
        opt.rel_upper = cfg.fit.upper;
        opt.rel_lower = cfg.fit.lower;
        res.fit = fit_dissipation_rate(t, v, opt);
        res.fit_ok = true;
    } catch (const std::exception& e) {
        res.fit_error = e.what();
    }
    return res;
}

}  // namespace pkslab
