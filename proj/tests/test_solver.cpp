#include "doctest.h"
#include "helpers.hpp"
#include "pkslab/diagnostics.hpp"
#include "pkslab/random.hpp"
#include "pkslab/run.hpp"
#include "pkslab/solver.hpp"

using namespace pkslab;
using th::sample;

namespace {

SimConfig small(int n = 16, double ly = 2.0) {
    SimConfig c;
    c.grid.nx = n;
    c.grid.ny = 2 * n;
    c.grid.nz = n;
    c.grid.ly = ly;
    c.init.width = 0.8;
    c.solver.t_max = 1.0;
    return c;
}

// blank state on the solver's grid
SimState blank(const Solver& s) {
    SimState st = s.init_state();
    st.n = SpectralScalar(s.grid());
    st.u = SpectralVector(s.grid());
    st.split.enabled = false;
    st.split.hat.clear();
    st.split.tilde.clear();
    s.refresh_c(st);
    return st;
}

// closed-form r1(T) for one mode, straight from the definition
double r1_closed(double k1, double k2, double k3, double T) {
    if (k1 == 0.0) return (k2 * k2 + k3 * k3) * T;
    return (k1 * k1 + k3 * k3) * T + (std::pow(k2, 3) - std::pow(k2 - T * k1, 3)) / (3.0 * k1);
}

}  // namespace

TEST_CASE("init_state data classes") {
    SimConfig c = small();
    c.init.mass = 10.0;
    for (std::string kind : {"bump", "bump_plus_xmode", "random_bandlimited"}) {
        c.init.kind = kind;
        SimState s = init_state(c);
        CHECK(integral(s.n) == doctest::Approx(10.0).epsilon(1e-12));
        auto v = to_physical(s.n);
        double mn = 1e300, mx = 0.0;
        for (double x : v) {
            mn = std::min(mn, x);
            mx = std::max(mx, x);
        }
        // gaussian truncation on a 16-point grid leaves a small undershoot
        CHECK(mn >= -1e-4 * mx);
        for (int k = 0; k < 3; ++k) CHECK(th::max_abs(s.u[k]) == 0.0);
    }
    c.init.mass = 0.0;
    CHECK_THROWS_AS(init_state(c), ConfigError);
    c.init.mass = 1.0;
    c.init.width = 2.0;  // 6 widths = 12 > pi * 2
    CHECK_THROWS_AS(init_state(c), ConfigError);
}

TEST_CASE("random data is bitwise reproducible and velocity is divergence free") {
    SimConfig c = small();
    c.init.kind = "random_bandlimited";
    c.init.u_amp = 0.3;
    c.init.seed = 42;
    SimState a = init_state(c), b = init_state(c);
    CHECK(a.n.c == b.n.c);
    for (int k = 0; k < 3; ++k) CHECK(a.u[k].c == b.u[k].c);
    CHECK(l2_norm(divergence(a.u)) <= 1e-12 * grad_l2_norm(a.u));
    c.init.seed = 43;
    SimState d = init_state(c);
    CHECK(d.n.c != a.n.c);
}

TEST_CASE("pressures single modes") {
    SimConfig c = small();
    Solver sv(c);
    SimState s = blank(sv);
    const double A = 7.0;
    s.u.u2 = sample(sv.grid(), [](double x, double, double) { return std::sin(x); });
    auto p = compute_pressures(s, A);
    auto want = sample(sv.grid(), [&](double x, double, double) { return 2 * A * std::cos(x); });
    CHECK(th::max_abs_diff(p.p1, want) < 1e-12);

    s = blank(sv);
    const double k = 3.0 / c.grid.ly;
    s.n = sample(sv.grid(), [&](double, double y, double) { return std::sin(k * y); });
    p = compute_pressures(s, A);
    auto want2 = sample(sv.grid(), [&](double, double y, double) { return -std::cos(k * y) / k; });
    CHECK(th::max_abs_diff(p.p2, want2) < 1e-14);
    CHECK(th::max_abs(p.p3) == 0.0);
    for (auto* q : {&p.p1, &p.p2, &p.p3}) CHECK(std::abs(q->c[0]) == 0.0);
}

TEST_CASE("tendency: zero state, chemotactic self interaction, lift-up") {
    SimConfig c = small();
    c.phys.A = 2.0;
    c.model.liftup_split = false;
    Solver sv(c);
    SimState s = blank(sv);
    Tendency t0 = sv.tendency(s);
    CHECK(th::max_abs(t0.dn) == 0.0);
    for (int k = 0; k < 3; ++k) CHECK(th::max_abs(t0.du[k]) == 0.0);

    // n = 1 + a cos x: -(1/A) div(n grad c) = (1/A)[(a/2) cos x + (a^2/2) cos 2x]
    const double a = 0.5, A = c.phys.A;
    s.n = sample(sv.grid(), [&](double x, double, double) { return 1.0 + a * std::cos(x); });
    sv.refresh_c(s);
    Tendency t1 = sv.tendency(s);
    auto want = sample(sv.grid(), [&](double x, double, double) {
        return (1.0 / A) * (0.5 * a * std::cos(x) + 0.5 * a * a * std::cos(2 * x));
    });
    CHECK(th::max_abs_diff(t1.dn, want) < 1e-14);
    CHECK(std::abs(t1.dn.c[0]) == 0.0);

    // u2 = cos z: the lift-up term alone, d_t u1 = -u2
    s = blank(sv);
    s.u.u2 = sample(sv.grid(), [](double, double, double z) { return std::cos(z); });
    Tendency t2 = sv.tendency(s);
    CHECK(th::max_abs_diff(t2.du.u1, -1.0 * s.u.u2) < 1e-15);
    CHECK(th::max_abs(t2.du.u2) < 1e-15);
    CHECK(th::max_abs(t2.du.u3) < 1e-15);
}

TEST_CASE("tendency is conservative and velocity tendency respects the rotating constraint") {
    SimConfig c = small();
    c.init.kind = "random_bandlimited";
    c.init.u_amp = 0.5;
    c.model.liftup_split = false;
    Solver sv(c);
    SimState s = sv.init_state();
    s.t = 0.37;
    sv.refresh_c(s);
    Tendency td = sv.tendency(s);
    CHECK(std::abs(td.dn.c[0]) == 0.0);
    // K(t).du = k1 u2 keeps K.u = 0 as K rotates; for an initially solenoidal u this reduces to
    // d/dt (K.u) = 0
    const Grid& g = *sv.grid();
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                const std::size_t m = g.idx(i, j, l);
                const double k1 = g.kx[i], k2 = g.ky[j] - s.t * k1, k3 = g.kz[l];
                const cplx r = k1 * td.du.u1.c[m] + k2 * td.du.u2.c[m] + k3 * td.du.u3.c[m] - k1 * s.u.u2.c[m];
                worst = std::max(worst, std::abs(r));
                scale = std::max(scale, std::abs(k1 * s.u.u2.c[m]) + std::abs(k2 * td.du.u2.c[m]));
            }
    CHECK(worst <= 1e-13 * std::max(scale, 1.0));
}

TEST_CASE("linear regime matches the integrating factor exactly") {
    SimConfig c = small();
    c.phys.A = 50.0;
    c.model.nonlinear = false;
    c.model.buoyancy = false;
    c.model.liftup_split = false;
    c.solver.dt_max = 0.1;
    Solver sv(c);
    const Grid& g = *sv.grid();
    Rng rng(99);
    SimState s = blank(sv);
    struct M {
        int i, j, l;
        cplx a;
    };
    std::vector<M> modes;
    for (int q = 0; q < 20; ++q) {
        M m{rng.integer(1, g.kmax_x / 2), rng.integer(1, g.kmax_y / 2), rng.integer(1, g.kmax_z / 2), cplx(rng.normal(), rng.normal())};
        cplx& slot = s.n.c[g.idx(m.i, m.j, m.l)];
        if (slot != cplx(0.0)) continue;
        slot = m.a;
        modes.push_back(m);
    }
    sv.refresh_c(s);
    const double dt = 0.1;
    for (int k = 0; k < 10; ++k) s = sv.step(s, dt);
    double worst = 0.0;
    for (const auto& m : modes) {
        const double k1 = g.kx[m.i], k2 = g.ky[m.j], k3 = g.kz[m.l];
        const cplx want = m.a * std::exp(-r1_closed(k1, k2, k3, 10 * dt) / c.phys.A);
        worst = std::max(worst, std::abs(s.n.c[g.idx(m.i, m.j, m.l)] - want) / std::abs(want));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("zero state stays zero; pure lift-up is linear in t") {
    SimConfig c = small();
    c.model.liftup_split = false;
    Solver sv(c);
    SimState z = blank(sv);
    for (double dt : {1e-3, 0.05, 0.25}) {
        SimState s = sv.step(z, dt);
        CHECK(th::max_abs(s.n) == 0.0);
        for (int k = 0; k < 3; ++k) CHECK(th::max_abs(s.u[k]) == 0.0);
    }

    c.model.diffusion = false;
    c.model.buoyancy = false;
    c.model.nonlinear = false;
    Solver lv(c);
    SimState s = blank(lv);
    s.u.u1 = sample(lv.grid(), [](double, double, double z) { return std::sin(2 * z); });
    s.u.u2 = sample(lv.grid(), [](double, double, double z) { return std::cos(z); });
    const auto u1 = s.u.u1, u2 = s.u.u2;
    for (int k = 0; k < 8; ++k) s = lv.step(s, 0.125);
    CHECK(th::max_abs_diff(s.u.u1, u1 - 1.0 * u2) < 1e-14);
    CHECK(th::max_abs_diff(s.u.u2, u2) < 1e-15);
}

TEST_CASE("CFL violation is rejected with a usable limit") {
    SimConfig c = small();
    c.phys.A = 1.0;
    c.init.mass = 200.0;
    c.solver.cfl = 0.01;
    Solver sv(c);
    SimState s = sv.init_state();
    const double lim = sv.dt_limit(0.0, sv.velocity_scale(s));
    try {
        sv.step(s, 10 * lim);
        FAIL("expected StepRejected");
    } catch (const StepRejected& e) {
        CHECK(e.dt_limit == doctest::Approx(lim));
    }
    CHECK_NOTHROW(sv.step(s, lim));
}

TEST_CASE("blow-up detector thresholds") {
    SimConfig c = small();
    Solver sv(c);
    SimState s = sv.init_state();
    const double ref = blowup_functional(s, c.phys.A);
    CHECK(detect_blowup(s, c, ref) == Status::running);
    SimState big = s;
    big.n *= 100.0;
    sv.refresh_c(big);
    CHECK(detect_blowup(big, c, ref) == Status::blowup);

    // 20% of the energy in the outer third of the band
    SimState tail = s;
    const Grid& g = *sv.grid();
    const double e = l2_norm_sq(project(s.n, ModeClass::zero)) - std::pow(integral(s.n), 2) / g.volume();
    const double target = 0.25 * e;  // tail/(total) = 0.25/1.25 = 0.2
    const std::size_t m = g.idx(g.kmax_x, 0, 0);
    tail.n.c[m] = std::sqrt(target / (2.0 * g.volume()));
    tail.n.c[g.idx(g.nx - g.kmax_x, 0, 0)] = tail.n.c[m];
    CHECK(tail_fraction(tail.n) == doctest::Approx(0.2).epsilon(1e-2));
    CHECK(detect_blowup(tail, c, ref) == Status::unresolved);
}

TEST_CASE("horizon gate") {
    SimConfig c = small();
    Solver sv(c);
    c.solver.t_max = c.solver.max_horizons * sv.band_horizon() * 1.01;
    CHECK_THROWS_AS(Solver{c}, ConfigError);
    c.model.couette = false;
    CHECK_NOTHROW(Solver{c});
}

TEST_CASE("short nonlinear run keeps mass and incompressibility") {
    SimConfig c = small();
    c.phys.A = 5.0;
    c.init.kind = "random_bandlimited";
    c.init.u_amp = 0.5;
    c.init.mass = 20.0;
    c.solver.t_max = 2.0;
    RunResult r = run_simulation(c);
    REQUIRE(r.status == Status::finished);
    CHECK(r.mass_drift <= 1e-8);
    CHECK(r.max_div_res <= 1e-10);
    CHECK(r.max_pythagoras <= 1e-12);
    CHECK(r.max_velocity_identity <= 1e-10);
    CHECK(r.max_split_residual <= 1e-6);
    CHECK(r.records.size() >= 2);
    CHECK(r.records.front().t == 0.0);
    CHECK(r.records.back().t == 2.0);
}

TEST_CASE("runs are deterministic") {
    SimConfig c = small();
    c.init.kind = "random_bandlimited";
    c.init.u_amp = 0.2;
    c.solver.t_max = 0.5;
    RunResult a = run_simulation(c), b = run_simulation(c);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        CHECK(a.records[k].t == b.records[k].t);
        CHECK(a.records[k].n_l2 == b.records[k].n_l2);
        CHECK(a.records[k].E2 == b.records[k].E2);
    }
    CHECK(a.final_state.n.c == b.final_state.n.c);
}

TEST_CASE("t_max = 0 yields a single finished record") {
    SimConfig c = small();
    c.solver.t_max = 0.0;
    RunResult r = run_simulation(c);
    CHECK(r.status == Status::finished);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].status == "finished");
}

TEST_CASE("non-zero mode decays after one shear time") {
    SimConfig c = small();
    c.phys.A = 1000.0;
    c.init.kind = "bump_plus_xmode";
    c.init.mass = 1e-3;
    c.solver.t_max = 6.0;
    RunResult r = run_simulation(c);
    REQUIRE(r.status == Status::finished);
    double prev = INFINITY;
    int checked = 0;
    for (const auto& rec : r.records) {
        if (rec.t < 1.0) continue;
        CHECK(rec.nneq_l2 <= prev * (1.0 + 1e-12));
        prev = rec.nneq_l2;
        ++checked;
    }
    CHECK(checked > 5);
}

TEST_CASE("positivity is monitored and the clip switch is logged") {
    SimConfig c = small();
    c.grid.nx = c.grid.nz = 8;
    c.grid.ny = 16;
    c.init.width = 0.3;  // under-resolved on purpose
    c.solver.tail_limit = 1.0;
    c.solver.t_max = 0.5;
    RunResult r = run_simulation(c);
    INFO(r.reason);
    CHECK(r.status == Status::finished);
    CHECK(r.worst_negativity > c.solver.positivity_tol);
    CHECK(r.positivity_events > 0);
    CHECK(r.clip_events == 0);
    c.solver.clip = true;
    RunResult rc = run_simulation(c);
    CHECK(rc.clip_events == rc.positivity_events);
    CHECK(rc.clip_events > 0);
}

TEST_CASE("r1 increment closed form") {
    CHECK(r1_increment(1, 0, 0, 0, 1) == doctest::Approx(4.0 / 3.0));
    CHECK(r1_increment(0, 2, 0, 0, 3) == doctest::Approx(12.0));
    Rng rng(3);
    for (int q = 0; q < 200; ++q) {
        const double k1 = rng.integer(-5, 5), k2 = rng.uniform(-5, 5), k3 = rng.integer(-5, 5);
        const double a = rng.uniform(0, 30), b = a + rng.uniform(0, 30);
        const double want = r1_closed(k1, k2, k3, b) - r1_closed(k1, k2, k3, a);
        CHECK(th::rel(r1_increment(k1, k2, k3, a, b), want) <= 1e-9);
    }
}
