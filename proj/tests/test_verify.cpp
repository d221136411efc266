#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "pkslab/verify.hpp"

using namespace pkslab;
using th::sample;

namespace {

std::vector<double> gaussian_line(int n, double length, double sigma, double amp = 1.0) {
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) {
        const double y = -0.5 * length + length * i / n;
        h[i] = amp * std::exp(-y * y / (sigma * sigma));
    }
    return h;
}

const CheckResult& find(const VerificationReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    FAIL("missing check " << name);
    throw 0;
}

}  // namespace

TEST_CASE("line norms of a gaussian match closed forms") {
    const double L = 8 * M_PI;
    LineNorms n = line_norms(gaussian_line(2048, L, 1.0), L);
    CHECK(n.linf == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(th::rel(n.l1, std::sqrt(M_PI)) <= 1e-12);
    CHECK(th::rel(n.l2, std::pow(M_PI / 2, 0.25)) <= 1e-12);
    CHECK(th::rel(n.d1, std::pow(M_PI / 2, 0.25)) <= 1e-12);
    const double gn = 1.0 / std::pow(M_PI / 2, 0.25);
    CHECK(th::rel(gn_ratio(n), gn) <= 1e-12);
    CHECK(gn_ratio(n) < 1.0);
    const double nash = std::pow(M_PI / 2, 0.25) /
                        (std::pow(16 * M_PI * M_PI / 27, -1.0 / 6) * std::pow(M_PI, 1.0 / 3) * std::pow(M_PI / 2, 1.0 / 12));
    CHECK(th::rel(nash_ratio(n), nash) <= 1e-12);
    CHECK(nash_ratio(n) < 1.0);
    CHECK(gn_ratio(LineNorms{}) == 0.0);
    CHECK(nash_ratio(LineNorms{}) == 0.0);
}

TEST_CASE("nash ratio is scale and dilation invariant") {
    const double L = 16 * M_PI;
    const double base = nash_ratio(line_norms(gaussian_line(4096, L, 1.0), L));
    for (double lam : {1e-3, 0.5, 7.0, 1e4}) CHECK(th::rel(nash_ratio(line_norms(gaussian_line(4096, L, 1.0, lam), L)), base) <= 1e-13);
    for (double s : {0.6, 1.5, 2.5}) CHECK(th::rel(nash_ratio(line_norms(gaussian_line(4096, L, s), L)), base) <= 1e-10);
}

TEST_CASE("ensemble generators honour their contracts") {
    EnsembleSpec spec;
    Rng rng(3);
    for (int q = 0; q < 20; ++q) {
        auto h = line_field(rng, spec, true);
        REQUIRE(int(h.size()) == spec.n1d);
        for (double v : h) CHECK(v >= 0.0);
    }
    GridPtr g = make_grid(spec.nx, spec.ny, spec.nz, spec.ly);
    for (int q = 0; q < 10; ++q) {
        const double sh = rng.uniform(-3, 3);
        SpectralVector u = random_divfree(g, rng, spec.decay, sh);
        CHECK(l2_norm(divergence(u, sh)) <= 1e-12 * grad_l2_norm(u, sh));
        for (int k = 0; k < 3; ++k) CHECK(l2_norm(project(u[k], ModeClass::zero)) == 0.0);
        CHECK(l2_norm(u) > 0.0);
        SpectralScalar f = random_field(g, rng, spec.decay, FieldClass::x_mean_free);
        CHECK(l2_norm(project(f, ModeClass::zero)) == 0.0);
        SpectralScalar p = random_field(g, rng, spec.decay, FieldClass::nonnegative);
        const auto pv = to_physical(p);
        CHECK(*std::min_element(pv.begin(), pv.end()) >= -1e-14 * linf_norm(p));
        CHECK(l2_norm(p - dealias(p)) == 0.0);
    }
}

TEST_CASE("elliptic single mode and velocity hand example") {
    GridPtr g = make_grid(8, 32, 8, 2.0);
    for (int m : {1, 3, 5}) {
        const double k = m / 2.0;
        auto n = sample(g, [&](double, double y, double) { return std::cos(k * y); });
        auto c = helmholtz_solve(n);
        const double lhs = l2_norm_sq(derivative(c, Axis::y, 2)) + 2 * l2_norm_sq(derivative(c, Axis::y, 1)) + l2_norm_sq(c);
        CHECK(th::rel(lhs, l2_norm_sq(n)) <= 1e-13);
        CHECK(th::rel((k * k * k * k + 2 * k * k + 1) / ((1 + k * k) * (1 + k * k)), 1.0) <= 1e-15);
    }

    SpectralVector u(g);
    u.u1 = sample(g, [](double, double y, double z) { return std::sin(z) * (1.5 + std::sin(y / 2)); });
    auto w2 = derivative(u.u1, Axis::z, 1) - derivative(u.u3, Axis::x, 1);
    const double lhs = l2_norm_sq(w2) + l2_norm_sq(derivative(u.u2, Axis::y, 1));
    double rhs = 0.0;
    for (int k : {0, 2})
        for (Axis a : {Axis::x, Axis::z}) rhs += l2_norm_sq(derivative(u[k], a, 1));
    auto want = sample(g, [](double, double y, double z) { return std::cos(z) * (1.5 + std::sin(y / 2)); });
    CHECK(th::rel(lhs, l2_norm_sq(want)) <= 1e-13);
    CHECK(th::rel(rhs, l2_norm_sq(want)) <= 1e-13);
}

TEST_CASE("inequality and identity suites pass") {
    EnsembleSpec spec;
    for (const auto& rep : {check_gn_1d(spec), check_nash_1d(spec), check_elliptic_identities(spec),
                            check_velocity_identities(spec), check_aniso_ratios(spec)}) {
        CHECK(rep.pass());
        CHECK_FALSE(rep.checks.empty());
        for (const auto& c : rep.checks) {
            INFO(c.name << " worst " << c.worst << " at " << c.worst_at);
            CHECK(c.pass);
            CHECK(std::isfinite(c.worst));
            CHECK(c.samples > 0);
        }
    }
    VerificationReport n = check_nash_1d(spec);
    CHECK(find(n, "nash_1d").samples >= 100);
    CHECK(find(n, "nash_1d").tolerance == 1e-8);
    CHECK(find(n, "nash_scale_invariance").worst <= 1e-12);
    VerificationReport e = check_elliptic_identities(spec);
    CHECK(find(e, "helmholtz_energy_zero_mode").worst <= 1e-10);
    CHECK(find(e, "helmholtz_energy_zero_mode").samples >= 100);
    VerificationReport v = check_velocity_identities(spec);
    CHECK(find(v, "vorticity_parseval_identity").worst <= 1e-10);
    CHECK(find(v, "vorticity_parseval_identity").samples >= 100);
}

TEST_CASE("any failing check fails the report, capped ones included") {
    VerificationReport r;
    CheckResult c;
    c.name = "x";
    r.checks.push_back(c);
    CHECK(r.pass());
    r.checks[0].pass = false;
    CHECK_FALSE(r.pass());
    r.checks[0].asserted = false;
    CHECK_FALSE(r.pass());
}

TEST_CASE("empirical constants are stable across seeds") {
    EnsembleSpec a, b;
    a.seed = 11;
    b.seed = 12345;
    std::map<std::string, double> wa;
    for (const auto& c : check_aniso_ratios(a).checks) wa[c.name] = c.worst;
    int compared = 0;
    for (const auto& c : check_aniso_ratios(b).checks) {
        if (c.asserted) continue;
        INFO(c.name << " " << wa[c.name] << " vs " << c.worst);
        CHECK(c.worst <= 2 * wa[c.name]);
        CHECK(wa[c.name] <= 2 * c.worst);
        ++compared;
    }
    CHECK(compared >= 4);
}

TEST_CASE("kernel r1: examples and quadrature") {
    CHECK(kernel_r1(1, 0, 0, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(kernel_r1(0, 2, 0, 3) == doctest::Approx(12.0).epsilon(1e-15));
    CHECK(kernel_r(1, 2, 3, 0.5) == doctest::Approx(1 + 1.5 * 1.5 + 9));
    Rng rng(21);
    for (int q = 0; q < 200; ++q) {
        const double k1 = rng.integer(-4, 4), k2 = rng.uniform(-6, 6), k3 = rng.integer(-4, 4), t = rng.uniform(0, 40);
        CHECK(th::rel(kernel_r1(k1, k2, k3, t), kernel_r1_quadrature(k1, k2, k3, t)) <= 1e-10);
        if (k1 != 0.0 || k3 != 0.0 || k2 != 0.0) CHECK(kernel_r(k1, k2, k3, t) > 0.0);
    }
    CHECK(kernel_r1(2, 1, 1, 7) - kernel_r1(2, 1, 1, 7) == 0.0);
}

TEST_CASE("affine constant is the maximum of the gap") {
    Rng rng(4);
    for (int q = 0; q < 50; ++q) {
        const double k1 = rng.integer(1, 6), A = std::pow(10.0, rng.uniform(0, 5)), b = rng.uniform(0, 3);
        const double C = affine_constant(k1, A, b), xs = affine_argmax(k1, A, b);
        CHECK(th::rel(C, 4.0 / 3.0 * std::pow(b + 1, 1.5) / k1) <= 1e-13);
        CHECK(th::rel(xs, 2 * std::sqrt(b + 1) * std::cbrt(A) / k1) <= 1e-13);
        auto gap = [&](double x) { return (b + 1) / std::cbrt(A) * x - k1 * k1 * x * x * x / (12 * A); };
        double best = 0.0;
        for (int i = 0; i <= 4000; ++i) best = std::max(best, gap(3 * xs * i / 4000));
        CHECK(best <= C * (1 + 1e-12));
        CHECK(best >= C * (1 - 1e-6));
    }
}

TEST_CASE("kernel decay on the example mode") {
    std::vector<double> t;
    for (int i = 0; i <= 800; ++i) t.push_back(i / 16.0);
    VerificationReport r = kernel_decay_check(1, 5, 0, 1000, 1, t);
    for (const auto& c : r.checks) {
        INFO(c.name << " " << c.worst);
        CHECK(c.pass);
    }
    CHECK(r.pass());
    for (const auto& row : kernel_table(1, 5, 0, 1000, 1, t)) CHECK(row.amplitude <= row.bound * (1 + 1e-14));
    // both sides of the cubic gap vanish at t1 = t2
    std::vector<double> one = {3.25, 3.25};
    CHECK(kernel_decay_check(1, 5, 0, 1000, 1, one).pass());

    KernelConfig kc;
    EnsembleSpec spec;
    VerificationReport s = kernel_suite(spec, kc);
    CHECK(s.pass());
    CHECK(find(s, "cubic_gap_random_modes").samples >= 50);
}

TEST_CASE("space-time norms of the forced mode") {
    ModeForcing free;
    ZbNorms z = spacetime_norms(1, 0, 0, 1000, 1, 50, free);
    CHECK(std::isfinite(z.lhs));
    CHECK(z.rhs == doctest::Approx(1.0));
    CHECK(z.sup >= 1.0 - 1e-12);
    CHECK(z.ratio() <= 100.0);

    ModeForcing f2;
    f2.f0 = 0.0;
    f2.f2.push_back({cplx(1.0, 0.5), 10.0, 1.0});
    ZbNorms y = spacetime_norms(1, 0, 0, 1000, 1, 50, f2);
    CHECK(y.rhs > 0.0);
    CHECK(y.ratio() <= 100.0);

    VerificationReport r = check_spacetime_bound(1, 0, 0, {1e2, 1e3, 1e4}, 1, 50, 20, 7, 100);
    for (const auto& c : r.checks) {
        INFO(c.name << " " << c.worst);
        CHECK(c.pass);
    }
    CHECK(find(r, "zb_constant_uniform_in_A").worst <= 2.0);
}

TEST_CASE("suite dispatch") {
    SimConfig cfg;
    cfg.verify.count = 20;
    for (const auto& n : suite_names()) CHECK(run_suite(n, cfg).pass());
    CHECK_THROWS_AS(run_suite("nope", cfg), ConfigError);
}
