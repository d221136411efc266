// End-to-end acceptance: one PASS/FAIL line per criterion, exit 1 if any fails.
// Heavy runs (dissipation sweep, contrast pair) take a few minutes on one core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "pkslab/experiment.hpp"
#include "pkslab/ode.hpp"
#include "pkslab/random.hpp"
#include "pkslab/run.hpp"
#include "pkslab/solver.hpp"
#include "pkslab/verify.hpp"

using namespace pkslab;

namespace {

const std::string kConfigs = PKSLAB_CONFIG_DIR;

struct Line {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string tol;
    std::string detail;
};

std::vector<Line> lines;
// every accepted run feeds the conservation criterion
std::vector<std::pair<std::string, RunResult>> accepted;

void report(Line l, double seconds) {
    std::printf("%s %-28s value=%-24s tol=%-18s %.1fs  %s\n", l.pass ? "PASS" : "FAIL", l.name.c_str(),
                fmt_double(l.value).c_str(), l.tol.c_str(), seconds, l.detail.c_str());
    std::fflush(stdout);
    lines.push_back(std::move(l));
}

void criterion(const std::function<Line()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Line l;
    try {
        l = f();
    } catch (const std::exception& e) {
        l.pass = false;
        l.detail = std::string("exception: ") + e.what();
    }
    report(l, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

Line from_report(const std::string& name, const VerificationReport& r) {
    Line l{name, r.pass(), 0.0, "0 failed", ""};
    int asserted = 0;
    std::string worst;
    for (const auto& c : r.checks) {
        if (!c.asserted) continue;
        ++asserted;
        l.value += !c.pass;
        worst += " " + c.name + "=" + fmt_double(c.worst) + (c.pass ? "" : "(FAIL)");
    }
    l.detail = std::to_string(asserted) + " asserted checks, worst:" + worst;
    if (asserted == 0) l.pass = false;
    return l;
}

SimConfig verify_cfg() {
    SimConfig c;
    c.verify.count = 100;
    return c;
}

// ---------------------------------------------------------------------------

Line helmholtz() {
    GridPtr g = make_grid(16, 32, 16, 2.0);
    double single = 0.0, resid = 0.0;
    // single modes: c = n / (1 + |k|^2), inverse Laplacian eigen-relation, also at a shear
    Rng rng(31);
    for (int q = 0; q < 40; ++q) {
        const int i = rng.integer(0, g->kmax_x), j = rng.integer(-g->kmax_y, g->kmax_y),
                  l = rng.integer(0, g->kmax_z);
        const double shear = q % 2 ? rng.uniform(-2, 2) : 0.0;
        const double a = rng.uniform(-1, 1), ph = rng.uniform(0, 2 * M_PI);
        auto n = th::sample(g, [&](double x, double y, double z) { return std::cos(i * x + j * y / g->ly + l * z + ph); });
        const double k1 = i, k3 = l, k2 = j / g->ly - shear * k1;
        const double kk = k1 * k1 + k2 * k2 + k3 * k3;
        n = a * n;
        single = std::max(single, th::rel_diff(helmholtz_solve(n, shear), (1.0 / (1.0 + kk)) * n));
        if (kk > 0.0) single = std::max(single, th::rel_diff(inv_laplacian(n, shear), (-1.0 / kk) * n));
    }
    for (std::uint64_t s = 1; s <= 20; ++s) {
        Rng r(500 + s);
        auto n = random_field(g, r, 2.0, FieldClass::generic);
        const double shear = 0.37 * double(s);
        auto c = helmholtz_solve(n, shear);
        resid = std::max(resid, l2_norm(laplacian(c, shear) + n - c) / l2_norm(n));
        n.c[0] = 0.0;
        resid = std::max(resid, th::rel_diff(laplacian(inv_laplacian(n, shear), shear), n));
    }
    return {"helmholtz_poisson", single <= 1e-12 && resid <= 1e-10, std::max(single, resid), "1e-12 / 1e-10",
            "single-mode " + fmt_double(single) + ", random residual " + fmt_double(resid)};
}

Line elliptic() { return from_report("elliptic_identities", run_suite("elliptic", verify_cfg())); }

Line sharp_constants() {
    VerificationReport r = run_suite("gn", verify_cfg());
    r.merge(run_suite("nash", verify_cfg()));
    return from_report("sharp_constant_inequalities", r);
}

Line velocity() { return from_report("velocity_parseval", run_suite("velocity", verify_cfg())); }

Line kernel() {
    SimConfig c = verify_cfg();
    VerificationReport r = kernel_suite(ensemble_spec(c), c.kernel, 50);
    return from_report("kernel_suite", r);
}

Line ode_bound() {
    const double pi2 = M_PI * M_PI;
    int points = 0, bad = 0;
    double worst = -INFINITY;
    for (double A : {1.0, 10.0, 100.0, 1000.0, 1e4})
        for (double m1 : {0.1, 0.5, 1.0, 1.2, 2.0})
            for (double f : {0.0, 1e-3, 0.1, 0.5, 0.9, 1.0, 1.5, 4.0}) {
                OdeParams p;
                p.A = A;
                p.m1 = m1;
                const double hs = 27 * std::pow(m1, 4) / (32 * pi2);
                OdeTrajectory tr = integrate_ode(f * hs, p);
                const double excess = tr.sup - (std::max(f * hs, hs) + 1e-9);
                worst = std::max(worst, excess);
                bad += excess > 0.0;
                ++points;
            }
    Rng rng(4242);
    int forced_bad = 0;
    double forced_worst = -INFINITY;
    for (int q = 0; q < 100; ++q) {
        OdeParams p;
        p.A = rng.uniform(1, 100);
        p.m1 = rng.uniform(0.3, 1.5);
        p.eps1 = rng.uniform(0.01, 0.5);
        p.ghat_bound = p.eps1 * rng.uniform(0.1, 1.0);
        const double h0 = equilibrium(p).h_star * rng.uniform(0, 2), T = 20 * p.A;
        PulseForcing g;
        const int k = rng.integer(1, 5);
        std::vector<double> w(k);
        double sw = 0.0;
        for (double& x : w) sw += (x = rng.uniform());
        for (int i = 0; i < k; ++i) {
            g.at.push_back(rng.uniform(0, T));
            g.width.push_back(rng.uniform(0.01, 0.2) * p.A);
            g.weight.push_back(w[i] / sw * p.ghat_bound);
        }
        OdeTrajectory tr = integrate_ode(h0, p, T, std::cref(g), g.min_width() / 4);
        const double ex = tr.sup / perturbed_bound(h0, p) - 1.0;
        forced_worst = std::max(forced_worst, ex);
        forced_bad += ex > 0.0;
    }
    return {"zero_mode_ode_bound", bad == 0 && forced_bad == 0 && points == 200, worst, "excess <= 0",
            std::to_string(points) + " grid points, worst forced sup/bound - 1 = " + fmt_double(forced_worst)};
}

Line linear_equivalence() {
    SimConfig c;
    c.grid.nx = c.grid.nz = 16;
    c.grid.ny = 32;
    c.grid.ly = 2.0;
    c.phys.A = 50.0;
    c.model.nonlinear = false;
    c.model.buoyancy = false;
    c.model.liftup_split = false;
    c.solver.dt_max = 0.1;
    Solver sv(c);
    const Grid& g = *sv.grid();
    SimState s = sv.init_state();
    s.n = SpectralScalar(sv.grid());
    s.u = SpectralVector(sv.grid());
    s.split.enabled = false;
    s.split.hat.clear();
    s.split.tilde.clear();
    struct M {
        int i, j, l;
        cplx a;
    };
    std::vector<M> modes;
    Rng rng(2718);
    while (modes.size() < 20) {
        M m{rng.integer(1, g.kmax_x / 2), rng.integer(-g.kmax_y / 2, g.kmax_y / 2), rng.integer(0, g.kmax_z / 2),
            cplx(rng.normal(), rng.normal())};
        const int jj = m.j < 0 ? m.j + g.ny : m.j;
        cplx& slot = s.n.c[g.idx(m.i, jj, m.l)];
        if (slot != cplx(0.0)) continue;
        slot = m.a;
        m.j = jj;
        modes.push_back(m);
    }
    sv.refresh_c(s);
    const double dt = 0.1;
    for (int k = 0; k < 10; ++k) s = sv.step(s, dt);
    // integrating-factor amplitude from the time integral of |k1|^2 + |k2 - t k1|^2 + |k3|^2
    double worst = 0.0;
    const double T = 10 * dt;
    for (const auto& m : modes) {
        const double k1 = g.kx[m.i], k2 = g.ky[m.j], k3 = g.kz[m.l];
        const double r1 = (k1 * k1 + k3 * k3) * T + (std::pow(k2, 3) - std::pow(k2 - T * k1, 3)) / (3 * k1);
        const cplx want = m.a * std::exp(-r1 / c.phys.A);
        worst = std::max(worst, std::abs(s.n.c[g.idx(m.i, m.j, m.l)] - want) / std::abs(want));
    }
    return {"linear_equivalence", worst <= 1e-9, worst, "1e-9", "20 modes, 10 steps"};
}

Line dissipation() {
    const SimConfig base = parse_config_file(kConfigs + "/dissipation.cfg");
    std::vector<double> As = {125, 1000, 8000}, rates;
    std::string detail;
    for (double A : As) {
        SimConfig c = base;
        c.phys.A = A;
        c.solver.t_max = 2.6 * std::cbrt(A);
        RunResult r = run_simulation(c);
        accepted.emplace_back("dissipation A=" + fmt_double(A), r);
        if (r.status != Status::finished || !r.fit_ok)
            return {"enhanced_dissipation_slope", false, NAN, "[-0.45, -0.20]",
                    "A=" + fmt_double(A) + " " + to_string(r.status) + " " + r.reason + r.fit_error};
        rates.push_back(r.fit.rate);
        detail += "rate(" + fmt_double(A) + ")=" + fmt_double(r.fit.rate) + " ";
    }
    // least-squares slope of log rate against log A
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < As.size(); ++k) {
        const double x = std::log(As[k]), y = std::log(rates[k]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double n = double(As.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    detail += "ratios 8A/A " + fmt_double(rates[1] / rates[0]) + ", " + fmt_double(rates[2] / rates[1]);
    return {"enhanced_dissipation_slope", slope >= -0.45 && slope <= -0.20, slope, "[-0.45, -0.20]", detail};
}

Line contrast() {
    SimConfig b = parse_config_file(kConfigs + "/blowup.cfg");
    RunResult rb = run_simulation(b);
    accepted.emplace_back("blowup", rb);
    double tail = 0.0;
    for (const auto& rec : rb.records) tail = std::max(tail, rec.tail_frac);
    const bool blew = rb.status == Status::blowup && rb.max_functional_ratio > b.solver.blowup_factor &&
                      tail < b.solver.tail_limit;

    SimConfig s = parse_config_file(kConfigs + "/suppression.cfg");
    // the datum must be the same
    SimConfig same = b;
    same.phys.A = s.phys.A;
    same.model.couette = s.model.couette;
    same.solver.t_max = s.solver.t_max;
    if (emit_config(same) != emit_config(s)) throw std::runtime_error("blowup and suppression configs differ beyond A/flow/t_max");
    const double horizons = s.solver.t_max / Solver(s).band_horizon();
    RunResult rs = run_simulation(s);
    accepted.emplace_back("suppression", rs);
    double peak = 0.0;
    for (const auto& rec : rs.records) peak = std::max(peak, rec.n_linf);
    const double growth = peak / rs.initial_n_linf;
    const bool held = rs.status == Status::finished && horizons >= 3.0 - 1e-12 &&
                      rs.records.back().t >= s.solver.t_max * (1 - 1e-12) && growth <= 2.0;
    return {"suppression_blowup_contrast", blew && held, growth, "detector>50x / linf<=2x",
            "flow off: " + to_string(rb.status) + " at t=" + fmt_double(rb.records.back().t) + " functional x" +
                fmt_double(rb.max_functional_ratio) + " max tail " + fmt_double(tail) + "; A=1e4: " +
                to_string(rs.status) + " to t=" + fmt_double(rs.records.back().t) + " (" + fmt_double(horizons) +
                " horizons), sup |n|_inf / initial " + fmt_double(growth)};
}

Line conservation() {
    // determinism: two identical runs, byte-compared through the csv writer and the final coefficients
    SimConfig c = parse_config_file(kConfigs + "/quick.cfg");
    c.init.kind = "random_bandlimited";
    c.init.u_amp = 0.5;
    c.init.seed = 77;
    RunResult a = run_simulation(c), b = run_simulation(c);
    accepted.emplace_back("determinism", a);
    std::string ca, cb;
    for (const auto& r : a.records) ca += run_csv_row(r);
    for (const auto& r : b.records) cb += run_csv_row(r);
    const bool same = ca == cb && a.final_state.n.c == b.final_state.n.c && a.final_state.u.u1.c == b.final_state.u.u1.c;

    double mass = 0, div = 0, pyth = 0;
    std::string bad;
    for (const auto& [name, r] : accepted) {
        mass = std::max(mass, r.mass_drift);
        div = std::max(div, r.max_div_res);
        pyth = std::max(pyth, r.max_pythagoras);
        if (!(r.mass_drift <= 1e-8 && r.max_div_res <= 1e-10 && r.max_pythagoras <= 1e-12)) bad += name + " ";
    }
    return {"conservation_determinism", bad.empty() && same, mass, "1e-8 / 1e-10 / 1e-12",
            std::to_string(accepted.size()) + " runs; mass " + fmt_double(mass) + ", div " + fmt_double(div) +
                ", pythagoras " + fmt_double(pyth) + (same ? ", byte-identical rerun" : ", RERUN DIFFERS") +
                (bad.empty() ? "" : "; failing: " + bad)};
}

}  // namespace

int main() {
    criterion(helmholtz);
    criterion(elliptic);
    criterion(sharp_constants);
    criterion(velocity);
    criterion(kernel);
    criterion(ode_bound);
    criterion(linear_equivalence);
    criterion(dissipation);
    criterion(contrast);
    criterion(conservation);  // last: it audits every run above
    int failed = 0;
    for (const auto& l : lines) failed += !l.pass;
    std::printf("%d/%zu criteria passed\n", int(lines.size()) - failed, lines.size());
    return failed ? 1 : 0;
}
