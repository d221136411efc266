#include "pkslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pkslab/random.hpp"

namespace pkslab {

std::string to_string(Status s) {
    switch (s) {
        case Status::running: return "running";
        case Status::finished: return "finished";
        case Status::blowup: return "blowup";
        default: return "unresolved";
    }
}

double r1_increment(double k1, double k2, double k3, double a, double b) {
    // int_a^b (k2 - s k1)^2 ds = (b-a)(p^2 + p q + q^2)/3, no cancellation for large s
    const double p = k2 - a * k1, q = k2 - b * k1;
    return (k1 * k1 + k3 * k3) * (b - a) + (b - a) * (p * p + p * q + q * q) / 3.0;
}

namespace {

GridPtr grid_from(const SimConfig& c) {
    return make_grid(c.grid.nx, c.grid.ny, c.grid.nz, c.grid.ly, c.grid.dealias);
}

double h2_norm(const SpectralScalar& f) {
    const Grid& g = *f.grid;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                double k = g.kx[i] * g.kx[i] + g.ky[j] * g.ky[j] + g.kz[l] * g.kz[l];
                s += g.weight(l) * (1.0 + k + k * k) * std::norm(f.c[g.idx(i, j, l)]);
            }
    return std::sqrt(g.volume() * s);
}

void mask_band(const Grid& g, std::vector<cplx>& v) {
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l)
                if (!g.kept(i, j, l)) v[g.idx(i, j, l)] = 0.0;
}

void mask_band2(const Grid& g, std::vector<cplx>& v) {
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nzh; ++l)
            if (!(g.keep_y[j] && g.keep_z[l])) v[std::size_t(j) * g.nzh + l] = 0.0;
}

}  // namespace

Solver::Solver(const SimConfig& cfg) : cfg_(cfg), grid_(grid_from(cfg)), fft2_(cfg.grid.ny, cfg.grid.nz) {
    cfg_.validate();
    if (cfg_.model.couette && cfg_.solver.t_max > cfg_.solver.max_horizons * band_horizon() + 1e-12)
        throw ConfigError("solver.t_max = " + fmt_double(cfg_.solver.t_max) + " exceeds " +
                          fmt_double(cfg_.solver.max_horizons) + " shear-band horizons (horizon " +
                          fmt_double(band_horizon()) + ")");
}

SimState Solver::init_state() const {
    const Grid& g = *grid_;
    const InitConfig& in = cfg_.init;
    if (!(in.mass > 0.0)) throw ConfigError("init.mass must be > 0");
    if (6.0 * in.width > M_PI * g.ly)
        throw ConfigError("initial density reaches the y seam: 6*width = " + fmt_double(6.0 * in.width) +
                          " > pi*ly = " + fmt_double(M_PI * g.ly));

    SimState s;
    s.couette = cfg_.model.couette;
    std::vector<double> v(g.nphys());
    auto gy = [&](double y) { return std::exp(-y * y / (2.0 * in.width * in.width)); };
    auto vm = [&](double x) {
        if (in.width_xz <= 0.0) return 1.0;
        return std::exp((std::cos(x - M_PI) - 1.0) / (in.width_xz * in.width_xz));
    };

    struct Harmonic {
        int k1, k3;
        double a, phase;
    };
    std::vector<Harmonic> hs;
    double base = 0.0;
    if (in.kind == "random_bandlimited") {
        Rng rng(in.seed);
        for (int m = 0; m < in.modes; ++m) {
            Harmonic h{0, 0, 0.0, 0.0};
            while (h.k1 == 0 && h.k3 == 0) {
                h.k1 = rng.integer(-in.kmax, in.kmax);
                h.k3 = rng.integer(0, in.kmax);
            }
            h.a = rng.uniform(0.0, 1.0);
            h.phase = rng.uniform(0.0, 2.0 * M_PI);
            base += std::abs(h.a);
            hs.push_back(h);
        }
    }

    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                double x = g.x(i), y = g.y(j), z = g.z(l);
                double val = gy(y);
                if (in.kind == "bump") {
                    val *= vm(x) * vm(z);
                } else if (in.kind == "bump_plus_xmode") {
                    val *= (1.0 + in.xmode_amp * std::cos(x)) * vm(z);
                } else {
                    double s2 = base;
                    for (const auto& h : hs) s2 += h.a * std::cos(h.k1 * x + h.k3 * z + h.phase);
                    val *= s2;
                }
                v[g.pidx(i, j, l)] = val;
            }
    s.n = dealias(from_physical(grid_, v));
    double m0 = integral(s.n);
    s.n *= in.mass / m0;

    s.u = SpectralVector(grid_);
    if (in.u_amp > 0.0) {
        Rng rng(in.seed ^ 0x9e3779b97f4a7c15ULL);
        for (int comp = 0; comp < 3; ++comp) {
            std::vector<Harmonic> uh;
            for (int m = 0; m < in.modes; ++m) {
                Harmonic h{0, 0, 0.0, 0.0};
                h.k1 = rng.integer(-in.kmax, in.kmax);
                h.k3 = rng.integer(-in.kmax, in.kmax);
                h.a = rng.normal();
                h.phase = rng.uniform(0.0, 2.0 * M_PI);
                uh.push_back(h);
            }
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j)
                    for (int l = 0; l < g.nz; ++l) {
                        double x = g.x(i), y = g.y(j), z = g.z(l);
                        double acc = 0.0;
                        for (const auto& h : uh) acc += h.a * std::cos(h.k1 * x + h.k3 * z + h.phase);
                        v[g.pidx(i, j, l)] = gy(y) * acc;
                    }
            s.u[comp] = dealias(from_physical(grid_, v));
        }
        s.u = leray(s.u, 0.0);
        for (int comp = 0; comp < 3; ++comp) s.u[comp].c[0] = 0.0;
        double h2 = std::sqrt(std::pow(h2_norm(s.u.u1), 2) + std::pow(h2_norm(s.u.u2), 2) +
                              std::pow(h2_norm(s.u.u3), 2));
        if (h2 > 0.0)
            for (int comp = 0; comp < 3; ++comp) s.u[comp] *= in.u_amp / h2;
    }

    if (cfg_.model.liftup_split) {
        s.split.enabled = true;
        const std::size_t n2 = std::size_t(g.ny) * g.nzh;
        s.split.hat.assign(n2, cplx(0.0));
        s.split.tilde.assign(s.u.u1.c.begin(), s.u.u1.c.begin() + n2);
    }
    refresh_c(s);
    s.dt_hint = dt_limit(0.0, velocity_scale(s));
    return s;
}

void Solver::refresh_c(SimState& s) const { s.c = helmholtz_solve(s.n, s.shear()); }

double Solver::dt_limit(double t, double vmax) const {
    const Grid& g = *grid_;
    ShearFrame fr{t, cfg_.model.couette};
    double keff = g.kmax_x + fr.max_abs_k2(g) + g.kmax_z;
    double rate = keff * vmax / cfg_.phys.A;
    return std::min(cfg_.solver.dt_max, cfg_.solver.cfl / std::max(1.0, rate));
}

double Solver::velocity_scale(const SimState& s) const {
    Fields f;
    f.n = s.n.c;
    f.u1 = s.u.u1.c;
    f.u2 = s.u.u2.c;
    f.u3 = s.u.u3.c;
    if (s.split.enabled) {
        f.hat = s.split.hat;
        f.tilde = s.split.tilde;
    }
    Stage st;
    eval(f, s.t, st);
    return st.vmax;
}

void Solver::eval(const Fields& f, double t, Stage& out) const {
    const Grid& g = *grid_;
    const std::size_t N = g.nspec(), P = g.nphys();
    const double invA = 1.0 / cfg_.phys.A;
    const bool couette = cfg_.model.couette;
    const bool nonlinear = cfg_.model.nonlinear;
    const double s = couette ? t : 0.0;
    const cplx I(0.0, 1.0);
    Work& w = w_;

    // sheared gradient of c = (1 - Delta_L)^{-1} n, and physical fields
    w.spec.resize(N);
    for (int comp = 0; comp < 3; ++comp) {
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const double k1 = g.kx[i], k2 = g.ky[j] - s * k1;
                for (int l = 0; l < g.nzh; ++l) {
                    const double k3 = g.kz[l];
                    const std::size_t m = g.idx(i, j, l);
                    const double r = k1 * k1 + k2 * k2 + k3 * k3;
                    const double K = comp == 0 ? k1 : (comp == 1 ? k2 : k3);
                    w.spec[m] = I * K * f.n[m] / (1.0 + r);
                }
            }
        inverse_transform(g, w.spec, w.gc[comp], w.scratch);
    }
    inverse_transform(g, f.n, w.np, w.scratch);
    inverse_transform(g, f.u1, w.u[0], w.scratch);
    inverse_transform(g, f.u2, w.u[1], w.scratch);
    inverse_transform(g, f.u3, w.u[2], w.scratch);

    double umax = 0.0, gmax = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        umax = std::max(umax, w.u[0][p] * w.u[0][p] + w.u[1][p] * w.u[1][p] + w.u[2][p] * w.u[2][p]);
        gmax = std::max(gmax, w.gc[0][p] * w.gc[0][p] + w.gc[1][p] * w.gc[1][p] + w.gc[2][p] * w.gc[2][p]);
    }
    out.vmax = std::sqrt(umax) + std::sqrt(gmax);

    if (nonlinear) {
        w.prod.resize(P);
        for (int comp = 0; comp < 3; ++comp) {
            for (std::size_t p = 0; p < P; ++p) w.prod[p] = w.np[p] * (w.u[comp][p] + w.gc[comp][p]);
            from_physical(g, w.prod, w.q[comp]);
        }
        static const int pa[6] = {0, 0, 0, 1, 1, 2}, pb[6] = {0, 1, 2, 1, 2, 2};
        for (int k = 0; k < 6; ++k) {
            for (std::size_t p = 0; p < P; ++p) w.prod[p] = w.u[pa[k]][p] * w.u[pb[k]][p];
            from_physical(g, w.prod, w.ph[k]);
        }
    }

    Fields& d = out.d;
    d.n.assign(N, cplx(0.0));
    d.u1.assign(N, cplx(0.0));
    d.u2.assign(N, cplx(0.0));
    d.u3.assign(N, cplx(0.0));
    const bool buoy = cfg_.model.buoyancy;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double k1 = g.kx[i], k2 = g.ky[j] - s * k1;
            if (!(g.keep_x[i] && g.keep_y[j])) continue;
            for (int l = 0; l < g.nzh; ++l) {
                if (!g.keep_z[l]) continue;
                const double k3 = g.kz[l];
                const std::size_t m = g.idx(i, j, l);
                const double r = k1 * k1 + k2 * k2 + k3 * k3;
                if (r == 0.0) continue;  // mean density is conserved; mean velocity held at zero
                cplx G1 = 0.0, G2 = 0.0, G3 = 0.0;
                if (nonlinear) {
                    d.n[m] = -invA * I * (k1 * w.q[0][m] + k2 * w.q[1][m] + k3 * w.q[2][m]);
                    const cplx *P11 = &w.ph[0][m], *P12 = &w.ph[1][m], *P13 = &w.ph[2][m];
                    const cplx *P22 = &w.ph[3][m], *P23 = &w.ph[4][m], *P33 = &w.ph[5][m];
                    G1 = -invA * I * (k1 * *P11 + k2 * *P12 + k3 * *P13);
                    G2 = -invA * I * (k1 * *P12 + k2 * *P22 + k3 * *P23);
                    G3 = -invA * I * (k1 * *P13 + k2 * *P23 + k3 * *P33);
                }
                if (buoy) G2 += invA * f.n[m];
                cplx frame = 0.0;
                if (couette) {
                    G1 -= f.u2[m];
                    frame = k1 * f.u2[m];
                }
                // keeps K.u = 0 as K(t) rotates: K.du/dt = k1 u2
                const cplx corr = (k1 * G1 + k2 * G2 + k3 * G3 - frame) / r;
                d.u1[m] = G1 - k1 * corr;
                d.u2[m] = G2 - k2 * corr;
                d.u3[m] = G3 - k3 * corr;
            }
        }

    if (!f.hat.empty()) eval_split(f, out);
}

void Solver::eval_split(const Fields& f, Stage& out) const {
    const Grid& g = *grid_;
    const std::size_t n2 = std::size_t(g.ny) * g.nzh;
    const double invA = 1.0 / cfg_.phys.A;
    const cplx I(0.0, 1.0);
    Work& w = w_;
    std::vector<cplx> u1(f.u1.begin(), f.u1.begin() + n2);
    std::vector<cplx> u2(f.u2.begin(), f.u2.begin() + n2);
    std::vector<cplx> u3(f.u3.begin(), f.u3.begin() + n2);

    out.d.hat.assign(n2, cplx(0.0));
    out.d.tilde.assign(n2, cplx(0.0));
    const bool nonlinear = cfg_.model.nonlinear;
    if (nonlinear) {
        // physical: 0 hat, 1 tilde, 2 u1_0, 3 u2_0, 4 u3_0
        const std::vector<cplx>* src[5] = {&f.hat, &f.tilde, &u1, &u2, &u3};
        for (int k = 0; k < 5; ++k) fft2_.inverse(*src[k], w.y2[k], w.tmp);
        const std::size_t npts = std::size_t(g.ny) * g.nz;
        std::vector<double> prod(npts);
        // products: a2*hat, a3*hat, a2*tilde, a3*tilde, a1*a2, a1*a3
        static const int fa[6] = {3, 4, 3, 4, 2, 2}, fb[6] = {0, 0, 1, 1, 3, 4};
        for (int k = 0; k < 6; ++k) {
            for (std::size_t p = 0; p < npts; ++p) prod[p] = w.y2[fa[k]][p] * w.y2[fb[k]][p];
            fft2_.forward(prod, w.s2[k]);
        }
    }
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nzh; ++l) {
            if (!(g.keep_y[j] && g.keep_z[l])) continue;
            const std::size_t m = std::size_t(j) * g.nzh + l;
            const double k2 = g.ky[j], k3 = g.kz[l];
            if (k2 == 0.0 && k3 == 0.0) continue;
            cplx dh = cfg_.model.couette ? -u2[m] : cplx(0.0);
            cplx dt = 0.0;
            if (nonlinear) {
                dh -= invA * I * (k2 * w.s2[0][m] + k3 * w.s2[1][m]);
                // full k1 = 0 flux minus its zero-mode part leaves (u_neq . grad u1_neq)_0
                const cplx p12 = w.ph[1][m] - w.s2[4][m], p13 = w.ph[2][m] - w.s2[5][m];
                dt -= invA * I * (k2 * (w.s2[2][m] + p12) + k3 * (w.s2[3][m] + p13));
            }
            out.d.hat[m] = dh;
            out.d.tilde[m] = dt;
        }
}

Tendency Solver::tendency(const SimState& s) const {
    Fields f;
    f.n = s.n.c;
    f.u1 = s.u.u1.c;
    f.u2 = s.u.u2.c;
    f.u3 = s.u.u3.c;
    Stage st;
    eval(f, s.t, st);
    Tendency out{SpectralScalar(grid_), SpectralVector(grid_)};
    out.dn.c = std::move(st.d.n);
    out.du.u1.c = std::move(st.d.u1);
    out.du.u2.c = std::move(st.d.u2);
    out.du.u3.c = std::move(st.d.u3);
    return out;
}

SimState Solver::step(const SimState& s0, double dt) const {
    const Grid& g = *grid_;
    const std::size_t N = g.nspec();
    const double t0 = s0.t, tm = t0 + (2.0 / 3.0) * dt, t1 = t0 + dt;
    const double invA = 1.0 / cfg_.phys.A;
    const bool couette = cfg_.model.couette;
    const bool diffuse = cfg_.model.diffusion;

    Fields X0;
    X0.n = s0.n.c;
    X0.u1 = s0.u.u1.c;
    X0.u2 = s0.u.u2.c;
    X0.u3 = s0.u.u3.c;
    const bool split = s0.split.enabled;
    if (split) {
        X0.hat = s0.split.hat;
        X0.tilde = s0.split.tilde;
    }

    Stage F0;
    eval(X0, t0, F0);
    const double lim = dt_limit(t0, F0.vmax);
    if (dt > lim * (1.0 + 1e-12))
        throw StepRejected("dt " + fmt_double(dt) + " exceeds CFL limit " + fmt_double(lim), lim);

    // Three-stage SSP scheme with abscissae 0, 2/3, 2/3. Nodes never go backwards, so every
    // integrating factor below is a decay.
    std::vector<double> E01(N, 1.0), E0m(N, 1.0), Em1(N, 1.0);
    if (diffuse) {
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nzh; ++l) {
                    const std::size_t m = g.idx(i, j, l);
                    const double k1 = g.kx[i], k2 = g.ky[j], k3 = g.kz[l];
                    double a, b;
                    if (couette) {
                        a = r1_increment(k1, k2, k3, t0, tm) * invA;
                        b = r1_increment(k1, k2, k3, tm, t1) * invA;
                    } else {
                        const double kk = k1 * k1 + k2 * k2 + k3 * k3;
                        a = kk * (tm - t0) * invA;
                        b = kk * (t1 - tm) * invA;
                    }
                    E0m[m] = std::exp(-a);
                    Em1[m] = std::exp(-b);
                    E01[m] = std::exp(-(a + b));
                }
    }

    auto lists = [&](Fields& f) {
        std::vector<std::vector<cplx>*> v = {&f.n, &f.u1, &f.u2, &f.u3};
        if (split) {
            v.push_back(&f.hat);
            v.push_back(&f.tilde);
        }
        return v;
    };

    Fields X1 = X0;
    {
        auto x1 = lists(X1);
        auto f0 = lists(F0.d);
        for (std::size_t k = 0; k < x1.size(); ++k) {
            auto& a = *x1[k];
            const auto& fa = *f0[k];
            for (std::size_t m = 0; m < a.size(); ++m) a[m] = E0m[m] * (a[m] + (2.0 / 3.0) * dt * fa[m]);
        }
    }
    Stage F1;
    eval(X1, tm, F1);

    Fields X2 = X0;
    {
        auto x2 = lists(X2);
        auto x1 = lists(X1);
        auto f1 = lists(F1.d);
        for (std::size_t k = 0; k < x2.size(); ++k) {
            auto& a = *x2[k];
            const auto& b = *x1[k];
            const auto& fb = *f1[k];
            for (std::size_t m = 0; m < a.size(); ++m)
                a[m] = (2.0 / 3.0) * E0m[m] * a[m] + (1.0 / 3.0) * (b[m] + (4.0 / 3.0) * dt * fb[m]);
        }
    }
    Stage F2;
    eval(X2, tm, F2);

    Fields X3 = X0;
    {
        auto x3 = lists(X3);
        auto x2 = lists(X2);
        auto f0 = lists(F0.d);
        auto f2 = lists(F2.d);
        for (std::size_t k = 0; k < x3.size(); ++k) {
            auto& a = *x3[k];
            const auto& b = *x2[k];
            const auto& fa = *f0[k];
            const auto& fc = *f2[k];
            for (std::size_t m = 0; m < a.size(); ++m)
                a[m] = E01[m] * ((74.0 / 128.0) * a[m] + (20.0 / 128.0) * dt * fa[m]) +
                       (27.0 / 64.0) * Em1[m] * (b[m] + (4.0 / 3.0) * dt * fc[m]);
        }
    }

    SimState s1;
    s1.t = t1;
    s1.couette = s0.couette;
    s1.steps = s0.steps + 1;
    s1.clip_events = s0.clip_events;
    s1.positivity_events = s0.positivity_events;
    s1.worst_negativity = s0.worst_negativity;
    s1.status = Status::running;
    s1.n = SpectralScalar(grid_);
    s1.n.c = std::move(X3.n);
    mask_band(g, s1.n.c);
    SpectralVector u(grid_);
    u.u1.c = std::move(X3.u1);
    u.u2.c = std::move(X3.u2);
    u.u3.c = std::move(X3.u3);
    s1.u = leray(u, couette ? t1 : 0.0);
    for (int comp = 0; comp < 3; ++comp) {
        mask_band(g, s1.u[comp].c);
        s1.u[comp].c[0] = 0.0;
    }
    if (split) {
        s1.split.enabled = true;
        s1.split.hat = std::move(X3.hat);
        s1.split.tilde = std::move(X3.tilde);
        mask_band2(g, s1.split.hat);
        mask_band2(g, s1.split.tilde);
    }

    // resolution gates
    for (const auto& v : s1.n.c)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Unresolved("non-finite density");
    const double tail = tail_fraction(s1.n);
    if (tail >= cfg_.solver.tail_limit)
        throw Unresolved("spectral tail fraction " + fmt_double(tail) + " >= " + fmt_double(cfg_.solver.tail_limit));
    std::vector<double> np;
    to_physical(s1.n, np, w_.scratch);
    double nmax = 0.0, nmin = std::numeric_limits<double>::infinity();
    for (double v : np) {
        nmax = std::max(nmax, std::abs(v));
        nmin = std::min(nmin, v);
    }
    // positivity is monitored: violations are counted, optionally clipped, never fatal
    const double neg = -nmin / std::max(nmax, 1.0);
    s1.worst_negativity = std::max(s1.worst_negativity, neg);
    if (neg > cfg_.solver.positivity_tol) {
        s1.positivity_events += 1;
        if (cfg_.solver.clip) {
            for (double& v : np) v = std::max(v, 0.0);
            s1.n = dealias(from_physical(grid_, np));
            s1.clip_events += 1;
        }
    }
    if (split) {
        std::vector<cplx> dy(s1.split.hat.size());
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                const std::size_t m = std::size_t(j) * g.nzh + l;
                dy[m] = cplx(0.0, g.ky[j]) * s1.split.hat[m];
            }
        std::vector<double> phys;
        fft2_.inverse(dy, phys, w_.tmp);
        double mn = std::numeric_limits<double>::infinity();
        for (double v : phys) mn = std::min(mn, 1.0 + v * invA);
        if (mn < 0.5) throw Unresolved("lift-up frame degenerate: min d_y V = " + fmt_double(mn));
    }

    refresh_c(s1);
    s1.dt_hint = lim;
    return s1;
}

double tail_fraction(const SpectralScalar& f) {
    const Grid& g = *f.grid;
    const double cx = (2.0 / 3.0) * g.kmax_x, cy = (2.0 / 3.0) * g.kmax_y, cz = (2.0 / 3.0) * g.kmax_z;
    double tail = 0.0, total = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                if (i == 0 && j == 0 && l == 0) continue;
                const double e = g.weight(l) * std::norm(f.c[g.idx(i, j, l)]);
                total += e;
                if (std::abs(g.jx[i]) > cx || std::abs(g.jy[j]) > cy || std::abs(g.jz[l]) > cz) tail += e;
            }
    return total > 0.0 ? tail / total : 0.0;
}

double blowup_functional(const SimState& s, double A) {
    const Grid& g = *s.n.grid;
    const double sh = s.shear();
    double gu = grad_l2_norm(s.u, sh);
    double dn = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                const double k1 = g.kx[i], k3 = g.kz[l];
                dn += g.weight(l) * (k1 * k1 * k1 * k1 + k3 * k3 * k3 * k3) * std::norm(s.n.c[g.idx(i, j, l)]);
            }
    dn = std::sqrt(g.volume() * dn);
    return std::pow(A, -1.0 / 12.0) * gu + dn + linf_norm(s.n);
}

Status detect_blowup(const SimState& s, const SimConfig& cfg, double reference) {
    if (tail_fraction(s.n) >= cfg.solver.tail_limit) return Status::unresolved;
    const double f = blowup_functional(s, cfg.phys.A);
    if (f > cfg.solver.blowup_factor * reference) return Status::blowup;
    return Status::running;
}

Pressures compute_pressures(const SimState& s, double A) {
    const GridPtr& gp = s.n.grid;
    const Grid& g = *gp;
    const double sh = s.shear();
    const cplx I(0.0, 1.0);
    Pressures p{SpectralScalar(gp), SpectralScalar(gp), SpectralScalar(gp)};

    SpectralScalar src1(gp), src2(gp), src3(gp);
    std::vector<std::vector<double>> up(3);
    for (int c = 0; c < 3; ++c) up[c] = to_physical(s.u[c]);
    static const int pa[6] = {0, 0, 0, 1, 1, 2}, pb[6] = {0, 1, 2, 1, 2, 2};
    std::vector<SpectralScalar> prod;
    for (int k = 0; k < 6; ++k) {
        std::vector<double> v(g.nphys());
        for (std::size_t q = 0; q < v.size(); ++q) v[q] = up[pa[k]][q] * up[pb[k]][q];
        prod.push_back(dealias(from_physical(gp, v)));
    }
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                const std::size_t m = g.idx(i, j, l);
                const double K[3] = {g.kx[i], eff_k2(g, i, j, sh), g.kz[l]};
                if (s.couette) src1.c[m] = -2.0 * A * I * K[0] * s.u.u2.c[m];
                src2.c[m] = I * K[1] * s.n.c[m];
                // -div(u.grad u) = -d_i d_j (u_i u_j) for divergence-free u
                cplx acc = 0.0;
                for (int k = 0; k < 6; ++k) {
                    const double mult = (pa[k] == pb[k]) ? 1.0 : 2.0;
                    acc += mult * K[pa[k]] * K[pb[k]] * prod[k].c[m];
                }
                src3.c[m] = acc;
            }
    src3.c[0] = 0.0;
    p.p1 = inv_laplacian(src1, sh);
    p.p2 = inv_laplacian(src2, sh);
    p.p3 = inv_laplacian(src3, sh, 1e-10);
    return p;
}

SimState init_state(const SimConfig& cfg) { return Solver(cfg).init_state(); }
Tendency tendency(const SimState& s, const SimConfig& cfg) { return Solver(cfg).tendency(s); }
SimState step(const SimState& s, double dt, const SimConfig& cfg) { return Solver(cfg).step(s, dt); }

}  // namespace pkslab
