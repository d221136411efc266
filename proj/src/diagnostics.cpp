#include "pkslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pkslab {

namespace {

// d/dt hat excluding nothing: (1/A) Delta hat - (1/A) div(u_0 hat) - u2_0 (liftup)
std::vector<cplx> split_rates(const Grid& g, const std::vector<cplx>& hat, const std::vector<cplx>& tilde,
                              const std::vector<cplx>& u20, const std::vector<cplx>& u30,
                              const std::vector<cplx>* forcing, double A, bool liftup, bool diffusion,
                              bool advect, std::vector<cplx>* dtilde) {
    const std::size_t n2 = std::size_t(g.ny) * g.nzh, npts = std::size_t(g.ny) * g.nz;
    const cplx I(0.0, 1.0);
    const double invA = 1.0 / A;
    Fft2d fft(g.ny, g.nz);
    std::vector<cplx> scratch;
    std::vector<double> ph, pt, p2, p3, prod(npts);
    std::vector<cplx> a2h, a3h, a2t, a3t;
    if (advect) {
        fft.inverse(hat, ph, scratch);
        fft.inverse(u20, p2, scratch);
        fft.inverse(u30, p3, scratch);
        for (std::size_t p = 0; p < npts; ++p) prod[p] = p2[p] * ph[p];
        fft.forward(prod, a2h);
        for (std::size_t p = 0; p < npts; ++p) prod[p] = p3[p] * ph[p];
        fft.forward(prod, a3h);
        if (dtilde) {
            fft.inverse(tilde, pt, scratch);
            for (std::size_t p = 0; p < npts; ++p) prod[p] = p2[p] * pt[p];
            fft.forward(prod, a2t);
            for (std::size_t p = 0; p < npts; ++p) prod[p] = p3[p] * pt[p];
            fft.forward(prod, a3t);
        }
    }
    std::vector<cplx> dh(n2, cplx(0.0));
    if (dtilde) dtilde->assign(n2, cplx(0.0));
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nzh; ++l) {
            if (!(g.keep_y[j] && g.keep_z[l])) continue;
            const std::size_t m = std::size_t(j) * g.nzh + l;
            const double k2 = g.ky[j], k3 = g.kz[l], kk = k2 * k2 + k3 * k3;
            cplx v = liftup ? -u20[m] : cplx(0.0);
            if (diffusion) v -= kk * invA * hat[m];
            if (advect) v -= invA * I * (k2 * a2h[m] + k3 * a3h[m]);
            dh[m] = v;
            if (dtilde) {
                cplx w = 0.0;
                if (diffusion) w -= kk * invA * tilde[m];
                if (advect) w -= invA * I * (k2 * a2t[m] + k3 * a3t[m]);
                if (forcing) w -= invA * (*forcing)[m];
                (*dtilde)[m] = w;
            }
        }
    return dh;
}

double ysum(const Grid& g, const std::vector<cplx>& v, double (*wfun)(double, double, void*), void* ctx) {
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nzh; ++l) {
            const std::size_t m = std::size_t(j) * g.nzh + l;
            s += g.weight(l) * wfun(g.ky[j], g.kz[l], ctx) * std::norm(v[m]);
        }
    return g.volume() * s;
}

}  // namespace

NormRecord instantaneous_norms(const SimState& s, const SimConfig& cfg) {
    const Grid& g = *s.n.grid;
    const double sh = s.shear();
    const double A = cfg.phys.A;
    const double V = g.volume();
    NormRecord r;
    r.t = s.t;
    r.status = to_string(s.status);
    r.mass = integral(s.n);

    const double mw = std::min(std::sqrt(std::pow(A, -2.0 / 3.0) + s.t / A), 1.0);
    double grad_u = 0.0, gdiv = 0.0, bu = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double k1 = g.kx[i], K2 = g.ky[j] - sh * k1;
            for (int l = 0; l < g.nzh; ++l) {
                const std::size_t m = g.idx(i, j, l);
                const double k3 = g.kz[l];
                const double w = V * g.weight(l);
                const double r2 = k1 * k1 + K2 * K2 + k3 * k3;
                const double nn = std::norm(s.n.c[m]);
                const cplx u1 = s.u.u1.c[m], u2 = s.u.u2.c[m], u3 = s.u.u3.c[m];
                const double a1 = std::norm(u1), a2 = std::norm(u2), a3 = std::norm(u3);
                r.n_l2 += w * nn;
                grad_u += w * r2 * (a1 + a2 + a3);
                gdiv += w * std::norm(k1 * u1 + K2 * u2 + k3 * u3);
                bu += w * (k1 * k1 * k1 * k1 + k3 * k3 * k3 * k3) * nn;
                if (g.jx[i] == 0) {
                    const double kk = K2 * K2 + k3 * k3;
                    const double h2w = 1.0 + kk + kk * kk;
                    r.u10_h2 += w * h2w * a1;
                    r.u20_h2 += w * h2w * a2;
                    r.u30_h2 += w * h2w * a3;
                    r.y[Y_U20].l2 += w * a2;
                    r.y[Y_U20].grad += w * kk * a2;
                    r.y[Y_U30].l2 += w * a3;
                    r.y[Y_U30].grad += w * kk * a3;
                    r.y[Y_GRAD_U20].l2 += w * kk * a2;
                    r.y[Y_GRAD_U20].grad += w * kk * kk * a2;
                    r.y[Y_GRAD_U30].l2 += w * kk * a3;
                    r.y[Y_GRAD_U30].grad += w * kk * kk * a3;
                    r.y[Y_LAP_U20].l2 += w * kk * kk * a2;
                    r.y[Y_LAP_U20].grad += w * kk * kk * kk * a2;
                    r.y[Y_LAP_U30_W].l2 += w * mw * mw * kk * kk * a3;
                    r.y[Y_LAP_U30_W].grad += w * mw * mw * kk * kk * kk * a3;
                    if (g.jz[l] == 0) {
                        r.n00_l2 += w * nn;
                    } else {
                        r.n0neq_l2 += w * nn;
                        r.dz_n0neq_l2 += w * k3 * k3 * nn;
                        r.dzz_n0neq_l2 += w * k3 * k3 * k3 * k3 * nn;
                        r.y[Y_DZZ_N0NEQ].l2 += w * k3 * k3 * k3 * k3 * nn;
                        r.y[Y_DZZ_N0NEQ].grad += w * kk * k3 * k3 * k3 * k3 * nn;
                        r.dz_grad_c0neq_l2 += w * k3 * k3 * kk * nn / ((1.0 + kk) * (1.0 + kk));
                    }
                } else {
                    const double gil = k1 * k1 / r2;
                    auto put = [&](int f, double val) {
                        r.x[f].l2 += w * val;
                        r.x[f].grad += w * r2 * val;
                        r.x[f].gil += w * gil * val;
                    };
                    const double k1s = k1 * k1, k3s = k3 * k3;
                    const double omega = std::norm(k3 * u1 - k1 * u3);
                    r.nneq_l2 += w * nn;
                    r.dxx_nneq_l2 += w * k1s * k1s * nn;
                    r.dzz_nneq_l2 += w * k3s * k3s * nn;
                    r.dxdz_nneq_l2 += w * k1s * k3s * nn;
                    r.w2neq_l2 += w * omega;
                    r.dx_w2neq_l2 += w * k1s * omega;
                    r.dy_w2neq_l2 += w * K2 * K2 * omega;
                    r.dz_w2neq_l2 += w * k3s * omega;
                    r.lap_u2neq_l2 += w * r2 * r2 * a2;
                    r.dxx_u2neq_l2 += w * k1s * k1s * a2;
                    r.dxx_u3neq_l2 += w * k1s * k1s * a3;
                    r.vel_id_lhs += w * (omega + K2 * K2 * a2);
                    r.vel_id_rhs += w * (k1s + k3s) * (a1 + a3);
                    put(X_DXX_N, k1s * k1s * nn);
                    put(X_DZZ_N, k3s * k3s * nn);
                    put(X_LAP_U2, r2 * r2 * a2);
                    put(X_DX_W2, k1s * omega);
                    put(X_DY_W2, K2 * K2 * omega);
                    put(X_DZ_W2, k3s * omega);
                    put(X_DXX_N_B, k1s * k1s * nn);
                    put(X_DXDZ_N, k1s * k3s * nn);
                    put(X_DXX_U2, k1s * k1s * a2);
                    put(X_DXX_U3, k1s * k1s * a3);
                }
            }
        }
    auto rt = [](double& v) { v = std::sqrt(v); };
    for (double* p : {&r.n_l2, &r.n00_l2, &r.n0neq_l2, &r.dz_n0neq_l2, &r.dzz_n0neq_l2, &r.nneq_l2,
                      &r.dxx_nneq_l2, &r.dzz_nneq_l2, &r.dxdz_nneq_l2, &r.u10_h2, &r.u20_h2, &r.u30_h2,
                      &r.w2neq_l2, &r.dx_w2neq_l2, &r.dy_w2neq_l2, &r.dz_w2neq_l2, &r.lap_u2neq_l2,
                      &r.dxx_u2neq_l2, &r.dxx_u3neq_l2, &r.dz_grad_c0neq_l2})
        rt(*p);
    r.div_res = grad_u > 0.0 ? std::sqrt(gdiv / grad_u) : 0.0;
    r.tail_frac = tail_fraction(s.n);

    std::vector<double> np = to_physical(s.n);
    double mx = 0.0, mn = std::numeric_limits<double>::infinity(), edge = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const bool near_seam = std::abs(g.y(j)) >= 0.9 * M_PI * g.ly;
            for (int l = 0; l < g.nz; ++l) {
                const double v = np[g.pidx(i, j, l)];
                mx = std::max(mx, std::abs(v));
                mn = std::min(mn, v);
                if (near_seam) edge = std::max(edge, std::abs(v));
            }
        }
    r.n_linf = mx;
    r.n_min = mn;
    r.edge_density = mx > 0.0 ? edge / mx : 0.0;
    r.blowup_functional = std::pow(A, -1.0 / 12.0) * std::sqrt(grad_u) + std::sqrt(bu) + mx;

    if (s.split.enabled) {
        const std::size_t n2 = std::size_t(g.ny) * g.nzh;
        std::vector<cplx> u10(s.u.u1.c.begin(), s.u.u1.c.begin() + n2);
        std::vector<cplx> u20(s.u.u2.c.begin(), s.u.u2.c.begin() + n2);
        std::vector<cplx> u30(s.u.u3.c.begin(), s.u.u3.c.begin() + n2);
        std::vector<cplx> diff(n2);
        for (std::size_t m = 0; m < n2; ++m) diff[m] = s.split.hat[m] + s.split.tilde[m] - u10[m];
        auto unit = [](double, double, void*) { return 1.0; };
        const double den = std::sqrt(ysum(g, u10, unit, nullptr));
        const double num = std::sqrt(ysum(g, diff, unit, nullptr));
        r.split_residual = den > 0.0 ? num / den : num;

        auto h4 = [](double a, double b, void*) {
            const double kk = a * a + b * b;
            return 1.0 + kk + kk * kk + kk * kk * kk + kk * kk * kk * kk;
        };
        auto gh4 = [](double a, double b, void*) {
            const double kk = a * a + b * b;
            return kk * (1.0 + kk + kk * kk + kk * kk * kk + kk * kk * kk * kk);
        };
        auto k2w = [](double a, double b, void*) { return a * a + b * b; };
        auto k4w = [](double a, double b, void*) { return std::pow(a * a + b * b, 2); };
        auto k6w = [](double a, double b, void*) { return std::pow(a * a + b * b, 3); };
        r.hat_h4 = std::sqrt(ysum(g, s.split.hat, h4, nullptr));
        r.grad_hat_h4 = std::sqrt(ysum(g, s.split.hat, gh4, nullptr));
        std::vector<cplx> dth = split_rates(g, s.split.hat, s.split.tilde, u20, u30, nullptr, A,
                                            cfg.model.couette, cfg.model.diffusion, cfg.model.nonlinear, nullptr);
        r.dt_hat_l2 = std::sqrt(ysum(g, dth, unit, nullptr));
        r.lap_dt_hat_l2 = std::sqrt(ysum(g, dth, k4w, nullptr));
        r.y[Y_TILDE].l2 = ysum(g, s.split.tilde, unit, nullptr);
        r.y[Y_TILDE].grad = ysum(g, s.split.tilde, k2w, nullptr);
        r.y[Y_LAP_TILDE].l2 = ysum(g, s.split.tilde, k4w, nullptr);
        r.y[Y_LAP_TILDE].grad = ysum(g, s.split.tilde, k6w, nullptr);

        double min_dyV = 1.0;
        std::vector<double> kappa = split_kappa(g, s.split, A, &min_dyV);
        r.min_dyV = min_dyV;
        SpectralScalar u2n = project(s.u.u2, ModeClass::nonzero), u3n = project(s.u.u3, ModeClass::nonzero);
        std::vector<double> p2 = to_physical(u2n), p3 = to_physical(u3n), W(g.nphys());
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l) {
                    const std::size_t p = g.pidx(i, j, l);
                    W[p] = p2[p] + kappa[std::size_t(j) * g.nz + l] * p3[p];
                }
        r.w_l2 = lp_norm_physical(g, W, 2.0);
        // recover W through its spectral form and compare with the definition pointwise
        std::vector<cplx> Wc;
        std::vector<double> Wtmp(W), Wback, dv(g.nphys());
        std::vector<cplx> scratch;
        from_physical(g, Wtmp, Wc);
        inverse_transform(g, Wc, Wback, scratch);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l) {
                    const std::size_t p = g.pidx(i, j, l);
                    dv[p] = Wback[p] - p2[p] - kappa[std::size_t(j) * g.nz + l] * p3[p];
                }
        r.w_defect = lp_norm_physical(g, dv, 2.0);
    }
    return r;
}

double pythagoras_defect(const NormRecord& r) {
    const double whole = r.n_l2 * r.n_l2;
    const double parts = r.n00_l2 * r.n00_l2 + r.n0neq_l2 * r.n0neq_l2 + r.nneq_l2 * r.nneq_l2;
    return whole > 0.0 ? std::abs(whole - parts) / whole : std::abs(parts);
}

double velocity_identity_defect(const NormRecord& r) {
    const double s = std::max(r.vel_id_lhs, r.vel_id_rhs);
    return s > 0.0 ? std::abs(r.vel_id_lhs - r.vel_id_rhs) / s : 0.0;
}

EnergyLedger make_ledger(double A, double a, double eps0) {
    EnergyLedger L;
    L.A = A;
    L.a = a;
    L.eps = eps0 > 4.0 / 9.0 ? 4.0 / 9.0 : eps0;
    return L;
}

double EnergyLedger::weight_rate(int field) const {
    const double base = a * std::pow(A, -1.0 / 3.0);
    return field >= X_DXX_N_B ? 1.5 * base : base;
}

double EnergyLedger::x_norm(int f) const {
    return std::sqrt(x_sup[f] + x_int_gil[f] + std::pow(A, -1.0 / 3.0) * x_int_l2[f] + x_int_grad[f] / A);
}

double EnergyLedger::y_norm(int f) const { return std::sqrt(y_sup[f] + y_int_grad[f] / A); }

double EnergyLedger::E1() const {
    const double Ae = std::pow(A, eps);
    const double e11 = std::sqrt(sup_n00) + Ae * std::sqrt(sup_dz_grad_c0neq) +
                       std::sqrt(int_dz_n0neq) / std::pow(A, 0.5 - eps) + y_norm(Y_DZZ_N0NEQ);
    const double e12 = Ae * (y_norm(Y_U20) + y_norm(Y_U30) + y_norm(Y_GRAD_U20) + y_norm(Y_GRAD_U30) +
                             y_norm(Y_LAP_U20) + y_norm(Y_LAP_U30_W));
    const double e13 = Ae * (std::sqrt(sup_hat_h4) / A + std::sqrt(int_grad_hat_h4) / std::pow(A, 1.5) +
                             std::sqrt(sup_dt_hat) + std::sqrt(sup_lap_dt_hat)) +
                       std::pow(A, -1.0 / 3.0 + eps) * (y_norm(Y_TILDE) + y_norm(Y_LAP_TILDE));
    return e11 + e12 + e13;
}

double EnergyLedger::E2() const {
    const double q = std::pow(A, 0.75 * eps);
    return x_norm(X_DXX_N) + x_norm(X_DZZ_N) + q * (x_norm(X_LAP_U2) + x_norm(X_DX_W2)) +
           std::pow(A, -1.0 / 3.0 + 0.75 * eps) * (x_norm(X_DY_W2) + x_norm(X_DZ_W2));
}

double EnergyLedger::E4() const { return x_norm(X_DXX_N_B) + x_norm(X_DXDZ_N); }

double EnergyLedger::E5() const { return std::pow(A, 0.75 * eps) * (x_norm(X_DXX_U2) + x_norm(X_DXX_U3)); }

void update_ledger(EnergyLedger& L, NormRecord& rec) {
    auto sq = [](double v) { return v * v; };
    if (L.started && !(rec.t > L.t_last))
        throw std::invalid_argument("update_ledger: records must have increasing t (got " + fmt_double(rec.t) +
                                    " after " + fmt_double(L.t_last) + ")");
    const double dt = L.started ? rec.t - L.t_last : 0.0;
    auto trap = [&](double prev, double cur) { return 0.5 * dt * (prev + cur); };
    for (int f = 0; f < X_COUNT; ++f) {
        const double c = L.weight_rate(f);
        const double w = std::exp(2.0 * c * rec.t);
        const Tracked& x = rec.x[f];
        L.x_sup[f] = std::max(L.x_sup[f], w * x.l2);
        if (L.started) {
            const double wp = std::exp(2.0 * c * L.t_last);
            const Tracked& p = L.last.x[f];
            L.x_int_gil[f] += trap(wp * p.gil, w * x.gil);
            L.x_int_l2[f] += trap(wp * p.l2, w * x.l2);
            L.x_int_grad[f] += trap(wp * p.grad, w * x.grad);
        }
    }
    for (int f = 0; f < Y_COUNT; ++f) {
        L.y_sup[f] = std::max(L.y_sup[f], rec.y[f].l2);
        if (L.started) L.y_int_grad[f] += trap(L.last.y[f].grad, rec.y[f].grad);
    }
    L.sup_n00 = std::max(L.sup_n00, sq(rec.n00_l2));
    L.sup_dz_grad_c0neq = std::max(L.sup_dz_grad_c0neq, sq(rec.dz_grad_c0neq_l2));
    L.sup_hat_h4 = std::max(L.sup_hat_h4, sq(rec.hat_h4));
    L.sup_dt_hat = std::max(L.sup_dt_hat, sq(rec.dt_hat_l2));
    L.sup_lap_dt_hat = std::max(L.sup_lap_dt_hat, sq(rec.lap_dt_hat_l2));
    L.sup_n_linf = std::max(L.sup_n_linf, rec.n_linf);
    if (L.started) {
        L.int_dz_n0neq += trap(sq(L.last.dz_n0neq_l2), sq(rec.dz_n0neq_l2));
        L.int_grad_hat_h4 += trap(sq(L.last.grad_hat_h4), sq(rec.grad_hat_h4));
    }
    L.started = true;
    L.t_last = rec.t;
    rec.E1 = L.E1();
    rec.E2 = L.E2();
    rec.E3 = L.E3();
    rec.E4 = L.E4();
    rec.E5 = L.E5();
    L.last = rec;
}

FitResult fit_dissipation_rate(const std::vector<double>& t, const std::vector<double>& v, const FitOptions& opt) {
    if (t.size() != v.size()) throw std::invalid_argument("fit: size mismatch");
    for (double x : v)
        if (!(x > 0.0)) throw NonPositive("fit: series contains non-positive values");
    if (v.empty()) throw InsufficientData("fit: empty series");
    const double v0 = v.front();
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < opt.t_min) continue;
        if (opt.rel_upper > 0.0) {
            const double rel = v[i] / v0;
            if (rel > opt.rel_upper || rel < opt.rel_lower) continue;
        }
        xs.push_back(t[i]);
        ys.push_back(std::log(v[i]));
    }
    const int n = int(xs.size());
    if (n < opt.min_samples)
        throw InsufficientData("fit: " + std::to_string(n) + " samples in window, need " +
                               std::to_string(opt.min_samples));
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw InsufficientData("fit: all samples at one time");
    const double slope = sxy / sxx;
    FitResult res;
    res.rate = -slope;
    res.samples = n;
    const double ssr = syy - slope * sxy;
    res.r2 = syy > 0.0 ? 1.0 - std::max(ssr, 0.0) / syy : 1.0;
    return res;
}

void evolve_liftup_split(const Grid& g, LiftUpSplit& split, const SplitInputs& in, double dt, double A,
                         bool liftup, bool diffusion) {
    const std::size_t n2 = std::size_t(g.ny) * g.nzh;
    if (split.hat.size() != n2 || split.tilde.size() != n2 || in.u20.size() != n2 || in.u30.size() != n2)
        throw std::invalid_argument("evolve_liftup_split: companion grid mismatch");
    bool advect = false;
    for (std::size_t m = 0; m < n2; ++m) advect = advect || in.u20[m] != 0.0 || in.u30[m] != 0.0;
    const std::vector<cplx>* forcing = in.forcing.empty() ? nullptr : &in.forcing;

    // Integrating factor on the diffusion, the solver's SSP-RK3 (nodes 0, 2/3, 2/3) on the rest.
    std::vector<double> E01(n2, 1.0), E0m(n2, 1.0), Em1(n2, 1.0);
    if (diffusion)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                const double kk = g.ky[j] * g.ky[j] + g.kz[l] * g.kz[l];
                const std::size_t m = j * std::size_t(g.nzh) + l;
                E01[m] = std::exp(-kk * dt / A);
                E0m[m] = std::exp(-kk * (2.0 / 3.0) * dt / A);
                Em1[m] = std::exp(-kk * (1.0 / 3.0) * dt / A);
            }
    auto rates = [&](const std::vector<cplx>& h, const std::vector<cplx>& t, std::vector<cplx>& dh,
                     std::vector<cplx>& dtl) {
        dh = split_rates(g, h, t, in.u20, in.u30, forcing, A, liftup, false, advect, &dtl);
    };
    std::vector<cplx> dh0, dt0, dh1, dt1, dh2, dt2;
    const auto& h0 = split.hat;
    const auto& t0 = split.tilde;
    rates(h0, t0, dh0, dt0);
    std::vector<cplx> h1(n2), t1(n2);
    for (std::size_t m = 0; m < n2; ++m) {
        h1[m] = E0m[m] * (h0[m] + (2.0 / 3.0) * dt * dh0[m]);
        t1[m] = E0m[m] * (t0[m] + (2.0 / 3.0) * dt * dt0[m]);
    }
    rates(h1, t1, dh1, dt1);
    std::vector<cplx> h2(n2), t2(n2);
    for (std::size_t m = 0; m < n2; ++m) {
        h2[m] = (2.0 / 3.0) * E0m[m] * h0[m] + (1.0 / 3.0) * (h1[m] + (4.0 / 3.0) * dt * dh1[m]);
        t2[m] = (2.0 / 3.0) * E0m[m] * t0[m] + (1.0 / 3.0) * (t1[m] + (4.0 / 3.0) * dt * dt1[m]);
    }
    rates(h2, t2, dh2, dt2);
    std::vector<cplx> h3(n2), t3(n2);
    for (std::size_t m = 0; m < n2; ++m) {
        h3[m] = E01[m] * ((74.0 / 128.0) * h0[m] + (20.0 / 128.0) * dt * dh0[m]) +
                (27.0 / 64.0) * Em1[m] * (h2[m] + (4.0 / 3.0) * dt * dh2[m]);
        t3[m] = E01[m] * ((74.0 / 128.0) * t0[m] + (20.0 / 128.0) * dt * dt0[m]) +
                (27.0 / 64.0) * Em1[m] * (t2[m] + (4.0 / 3.0) * dt * dt2[m]);
    }
    split.hat = std::move(h3);
    split.tilde = std::move(t3);
}

std::vector<double> split_kappa(const Grid& g, const LiftUpSplit& split, double A, double* min_dyV) {
    const std::size_t n2 = std::size_t(g.ny) * g.nzh;
    std::vector<cplx> dy(n2), dz(n2);
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nzh; ++l) {
            const std::size_t m = std::size_t(j) * g.nzh + l;
            dy[m] = cplx(0.0, g.ky[j]) * split.hat[m];
            dz[m] = cplx(0.0, g.kz[l]) * split.hat[m];
        }
    Fft2d fft(g.ny, g.nz);
    std::vector<double> py, pz;
    std::vector<cplx> scratch;
    fft.inverse(dy, py, scratch);
    fft.inverse(dz, pz, scratch);
    std::vector<double> kappa(py.size());
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < py.size(); ++p) {
        const double Vy = 1.0 + py[p] / A;
        mn = std::min(mn, Vy);
        kappa[p] = (pz[p] / A) / Vy;
    }
    if (min_dyV) *min_dyV = mn;
    return kappa;
}

}  // namespace pkslab
