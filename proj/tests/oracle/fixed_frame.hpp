#pragma once

// Slow lab-frame reference for the perturbation system. Couette transport y d_x is applied as a
// physical-space product (fine for y-localized data far from the seam), diffusion by a constant
// integrating factor, and everything advanced with classical RK4. Shares only the transform and
// elliptic primitives with the library.

#include <cmath>
#include <vector>

#include "pkslab/spectral.hpp"

namespace oracle {

using namespace pkslab;

struct LabState {
    double t = 0.0;
    SpectralScalar n;
    SpectralVector u;
};

class FixedFrame {
public:
    FixedFrame(GridPtr g, double A, bool couette = true) : g_(std::move(g)), A_(A), couette_(couette) {}

    LabState step(const LabState& s, double dt) const {
        const std::vector<double> Eh = decay(0.5 * dt), E = decay(dt);
        auto k1 = rhs(s);
        auto v2 = mul(Eh, axpy(s, 0.5 * dt, k1));
        auto k2 = rhs(v2);
        auto v3 = axpy(mul(Eh, s), 0.5 * dt, k2);
        auto k3 = rhs(v3);
        auto v4 = axpy(mul(E, s), dt, mul(Eh, k3));
        auto k4 = rhs(v4);
        LabState out = mul(E, s);
        LabState inc = mul(E, k1);
        inc = axpy(inc, 2.0, mul(Eh, k2));
        inc = axpy(inc, 2.0, mul(Eh, k3));
        inc = axpy(inc, 1.0, k4);
        out = axpy(out, dt / 6.0, inc);
        out.t = s.t + dt;
        return out;
    }

    LabState rhs(const LabState& s) const {
        const Grid& g = *g_;
        const double invA = 1.0 / A_;
        LabState d;
        d.n = SpectralScalar(g_);
        d.u = SpectralVector(g_);

        const auto np = to_physical(s.n);
        const SpectralScalar c = helmholtz_solve(s.n);
        std::vector<double> up[3], gc[3];
        for (int a = 0; a < 3; ++a) {
            up[a] = to_physical(s.u[a]);
            gc[a] = to_physical(derivative(c, Axis(a), 1));
        }
        auto prod = [&](auto fn) {
            std::vector<double> v(g.nphys());
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j)
                    for (int l = 0; l < g.nz; ++l) {
                        const std::size_t p = g.pidx(i, j, l);
                        v[p] = fn(p, g.y(j));
                    }
            return dealias(from_physical(g_, v));
        };

        if (couette_) {
            const auto dxn = to_physical(derivative(s.n, Axis::x, 1));
            d.n = d.n - prod([&](std::size_t p, double y) { return y * dxn[p]; });
        }
        for (int a = 0; a < 3; ++a) {
            auto q = prod([&](std::size_t p, double) { return np[p] * (up[a][p] + gc[a][p]); });
            d.n = d.n - invA * derivative(q, Axis(a), 1);
        }

        SpectralVector f(g_);
        for (int i = 0; i < 3; ++i) {
            if (couette_) {
                const auto dxu = to_physical(derivative(s.u[i], Axis::x, 1));
                f[i] = f[i] - prod([&](std::size_t p, double y) { return y * dxu[p]; });
            }
            for (int a = 0; a < 3; ++a) {
                auto q = prod([&](std::size_t p, double) { return up[a][p] * up[i][p]; });
                f[i] = f[i] - invA * derivative(q, Axis(a), 1);
            }
        }
        if (couette_) f.u1 = f.u1 - s.u.u2;
        f.u2 = f.u2 + invA * s.n;
        d.u = leray(f);
        for (int i = 0; i < 3; ++i) d.u[i].c[0] = 0.0;
        return d;
    }

private:
    GridPtr g_;
    double A_;
    bool couette_;

    std::vector<double> decay(double dt) const {
        const Grid& g = *g_;
        std::vector<double> e(g.nspec());
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nzh; ++l) {
                    const double kk = g.kx[i] * g.kx[i] + g.ky[j] * g.ky[j] + g.kz[l] * g.kz[l];
                    e[g.idx(i, j, l)] = std::exp(-kk * dt / A_);
                }
        return e;
    }
    static LabState mul(const std::vector<double>& e, LabState s) {
        for (std::size_t m = 0; m < e.size(); ++m) {
            s.n.c[m] *= e[m];
            for (int k = 0; k < 3; ++k) s.u[k].c[m] *= e[m];
        }
        return s;
    }
    static LabState axpy(LabState a, double h, const LabState& b) {
        a.n = a.n + h * b.n;
        for (int k = 0; k < 3; ++k) a.u[k] = a.u[k] + h * b.u[k];
        return a;
    }
};

// Values at the lab grid points of a field stored in sheared coordinates X = x - shear y.
// Transforms put the y origin at the first grid line; the shear is about y = 0.
inline std::vector<double> sheared_to_lab(const SpectralScalar& f, double shear) {
    const Grid& g = *f.grid;
    std::vector<double> out(g.nphys(), 0.0);
    std::vector<cplx> line(std::size_t(g.nx) * g.nzh), ex(std::size_t(g.nx) * g.nx), ez(std::size_t(g.nzh) * g.nz);
    for (int i = 0; i < g.nx; ++i)
        for (int ix = 0; ix < g.nx; ++ix) ex[std::size_t(i) * g.nx + ix] = std::polar(1.0, g.kx[i] * g.x(ix));
    for (int l = 0; l < g.nzh; ++l)
        for (int iz = 0; iz < g.nz; ++iz) ez[std::size_t(l) * g.nz + iz] = std::polar(1.0, g.kz[l] * g.z(iz));
    for (int j = 0; j < g.ny; ++j) {
        const double y = g.y(j);
        for (int i = 0; i < g.nx; ++i)
            for (int l = 0; l < g.nzh; ++l) {
                cplx s = 0.0;
                for (int jj = 0; jj < g.ny; ++jj) s += f.c[g.idx(i, jj, l)] * std::polar(1.0, g.ky[jj] * (y - g.y(0)));
                line[std::size_t(i) * g.nzh + l] = s * std::polar(1.0, -shear * g.kx[i] * y);
            }
        for (int ix = 0; ix < g.nx; ++ix)
            for (int iz = 0; iz < g.nz; ++iz) {
                double v = 0.0;
                for (int i = 0; i < g.nx; ++i)
                    for (int l = 0; l < g.nzh; ++l)
                        v += g.weight(l) * (line[std::size_t(i) * g.nzh + l] * ex[std::size_t(i) * g.nx + ix] *
                                            ez[std::size_t(l) * g.nz + iz]).real();
                out[g.pidx(ix, j, iz)] = v;
            }
    }
    return out;
}

}  // namespace oracle
