#include "pkslab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace pkslab {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

fftw_complex* fc(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

class FftPlans {
public:
    FftPlans(int nx, int ny, int nz) {
        std::vector<double> r(std::size_t(nx) * ny * nz);
        std::vector<cplx> c(std::size_t(nx) * ny * (nz / 2 + 1));
        std::lock_guard<std::mutex> lock(plan_mutex());
        fwd = fftw_plan_dft_r2c_3d(nx, ny, nz, r.data(), fc(c.data()), kFlags);
        inv = fftw_plan_dft_c2r_3d(nx, ny, nz, fc(c.data()), r.data(), kFlags);
        norm = 1.0 / (double(nx) * ny * nz);
    }
    ~FftPlans() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

    fftw_plan fwd, inv;
    double norm;
};

double Grid::volume() const { return (2.0 * M_PI) * (2.0 * M_PI * ly) * (2.0 * M_PI); }
double Grid::x(int i) const { return 2.0 * M_PI * i / nx; }
double Grid::y(int j) const { return -M_PI * ly + 2.0 * M_PI * ly * j / ny; }
double Grid::z(int l) const { return 2.0 * M_PI * l / nz; }

GridPtr make_grid(int nx, int ny, int nz, double ly, double dealias_fraction) {
    for (int n : {nx, ny, nz}) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("grid sizes must be even and >= 8, got " + std::to_string(n));
    }
    if (!(ly > 0.0) || !std::isfinite(ly)) throw std::invalid_argument("grid.ly must be positive");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
        throw std::invalid_argument("dealias fraction must lie in (0,1]");

    auto g = std::make_shared<Grid>();
    g->nx = nx;
    g->ny = ny;
    g->nz = nz;
    g->nzh = nz / 2 + 1;
    g->ly = ly;
    g->dealias_fraction = dealias_fraction;

    auto fill = [&](int n, int count, double scale, std::vector<int>& j, std::vector<double>& k,
                    std::vector<unsigned char>& keep, int& kmax) {
        j.resize(count);
        k.resize(count);
        keep.resize(count);
        const double cut = dealias_fraction * n / 2.0;
        kmax = 0;
        for (int i = 0; i < count; ++i) {
            int s = (i <= n / 2) ? i : i - n;
            j[i] = s;
            k[i] = s * scale;
            // Nyquist is never kept
            bool ok = std::abs(s) < cut && 2 * std::abs(s) != n;
            keep[i] = ok ? 1 : 0;
            if (ok) kmax = std::max(kmax, std::abs(s));
        }
    };
    fill(nx, nx, 1.0, g->jx, g->kx, g->keep_x, g->kmax_x);
    fill(ny, ny, 1.0 / ly, g->jy, g->ky, g->keep_y, g->kmax_y);
    fill(nz, g->nzh, 1.0, g->jz, g->kz, g->keep_z, g->kmax_z);
    g->plans = std::make_shared<FftPlans>(nx, ny, nz);
    return g;
}

SpectralScalar& SpectralScalar::operator+=(const SpectralScalar& o) {
    for (std::size_t m = 0; m < c.size(); ++m) c[m] += o.c[m];
    return *this;
}
SpectralScalar& SpectralScalar::operator-=(const SpectralScalar& o) {
    for (std::size_t m = 0; m < c.size(); ++m) c[m] -= o.c[m];
    return *this;
}
SpectralScalar& SpectralScalar::operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
}
SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b) { return a += b; }
SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b) { return a -= b; }
SpectralScalar operator*(double s, SpectralScalar a) { return a *= s; }

void to_physical(const SpectralScalar& f, std::vector<double>& out, std::vector<cplx>& scratch) {
    const Grid& g = *f.grid;
    out.resize(g.nphys());
    scratch.assign(f.c.begin(), f.c.end());  // c2r clobbers its input
    fftw_execute_dft_c2r(g.plans->inv, fc(scratch.data()), out.data());
}

void inverse_transform(const Grid& g, const std::vector<cplx>& c, std::vector<double>& out,
                       std::vector<cplx>& scratch) {
    out.resize(g.nphys());
    scratch.assign(c.begin(), c.end());
    fftw_execute_dft_c2r(g.plans->inv, fc(scratch.data()), out.data());
}

std::vector<double> to_physical(const SpectralScalar& f) {
    std::vector<double> out;
    std::vector<cplx> scratch;
    to_physical(f, out, scratch);
    return out;
}

void from_physical(const Grid& g, std::vector<double>& v, std::vector<cplx>& out) {
    out.resize(g.nspec());
    fftw_execute_dft_r2c(g.plans->fwd, v.data(), fc(out.data()));
    const double s = g.plans->norm;
    for (auto& z : out) z *= s;
}

SpectralScalar from_physical(const GridPtr& g, const std::vector<double>& v) {
    SpectralScalar f(g);
    std::vector<double> tmp(v);
    from_physical(*g, tmp, f.c);
    // Nyquist planes carry no retained information
    for (int i = 0; i < g->nx; ++i)
        for (int j = 0; j < g->ny; ++j)
            for (int l = 0; l < g->nzh; ++l)
                if (2 * std::abs(g->jx[i]) == g->nx || 2 * std::abs(g->jy[j]) == g->ny || 2 * l == g->nz)
                    f.c[g->idx(i, j, l)] = 0.0;
    return f;
}

namespace {
double axis_k(const Grid& g, Axis a, int i, int j, int l, double shear) {
    switch (a) {
        case Axis::x: return g.kx[i];
        case Axis::y: return eff_k2(g, i, j, shear);
        default: return g.kz[l];
    }
}
cplx ipow(int order) {
    static const cplx p[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    return p[order % 4];
}
}  // namespace

SpectralScalar derivative(const SpectralScalar& f, Axis axis, int order, double shear) {
    if (order < 1 || order > 3) throw std::invalid_argument("derivative order must be 1, 2 or 3");
    const Grid& g = *f.grid;
    SpectralScalar out(f.grid);
    const cplx ph = ipow(order);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                std::size_t m = g.idx(i, j, l);
                double k = axis_k(g, axis, i, j, l, shear);
                out.c[m] = ph * std::pow(k, order) * f.c[m];
            }
    return out;
}

SpectralScalar laplacian(const SpectralScalar& f, double shear) {
    const Grid& g = *f.grid;
    SpectralScalar out(f.grid);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double k2 = eff_k2(g, i, j, shear);
            for (int l = 0; l < g.nzh; ++l) {
                double r = g.kx[i] * g.kx[i] + k2 * k2 + g.kz[l] * g.kz[l];
                out.c[g.idx(i, j, l)] = -r * f.c[g.idx(i, j, l)];
            }
        }
    return out;
}

SpectralScalar inv_laplacian(const SpectralScalar& f, double shear, double tol) {
    const Grid& g = *f.grid;
    double scale = 0.0;
    for (const auto& v : f.c) scale = std::max(scale, std::abs(v));
    if (std::abs(f.c[0]) > tol * std::max(scale, 1e-300) && std::abs(f.c[0]) > 0.0)
        throw NonZeroMean("inv_laplacian: source has nonzero mean " + std::to_string(std::abs(f.c[0])));
    SpectralScalar out(f.grid);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double k2 = eff_k2(g, i, j, shear);
            for (int l = 0; l < g.nzh; ++l) {
                double r = g.kx[i] * g.kx[i] + k2 * k2 + g.kz[l] * g.kz[l];
                std::size_t m = g.idx(i, j, l);
                out.c[m] = (r > 0.0) ? -f.c[m] / r : cplx(0.0);
            }
        }
    return out;
}

SpectralScalar helmholtz_solve(const SpectralScalar& n, double shear) {
    const Grid& g = *n.grid;
    SpectralScalar out(n.grid);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double k2 = eff_k2(g, i, j, shear);
            for (int l = 0; l < g.nzh; ++l) {
                double r = g.kx[i] * g.kx[i] + k2 * k2 + g.kz[l] * g.kz[l];
                std::size_t m = g.idx(i, j, l);
                out.c[m] = n.c[m] / (1.0 + r);
            }
        }
    return out;
}

bool in_class(const Grid& g, int i, int l, ModeClass cls) {
    const bool x0 = g.jx[i] == 0, z0 = g.jz[l] == 0;
    switch (cls) {
        case ModeClass::zero: return x0;
        case ModeClass::nonzero: return !x0;
        case ModeClass::zz_zero: return x0 && z0;
        default: return x0 && !z0;
    }
}

SpectralScalar project(const SpectralScalar& f, ModeClass cls) {
    const Grid& g = *f.grid;
    SpectralScalar out(f.grid);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l)
                if (in_class(g, i, l, cls)) out.c[g.idx(i, j, l)] = f.c[g.idx(i, j, l)];
    return out;
}

SpectralScalar dealias(const SpectralScalar& f) {
    const Grid& g = *f.grid;
    SpectralScalar out(f.grid);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l)
                if (g.kept(i, j, l)) out.c[g.idx(i, j, l)] = f.c[g.idx(i, j, l)];
    return out;
}

double l2_norm_sq(const SpectralScalar& f) {
    const Grid& g = *f.grid;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) s += g.weight(l) * std::norm(f.c[g.idx(i, j, l)]);
    return g.volume() * s;
}

double l2_norm(const SpectralScalar& f) { return std::sqrt(l2_norm_sq(f)); }

double inner(const SpectralScalar& f, const SpectralScalar& h) {
    const Grid& g = *f.grid;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nzh; ++l) {
                std::size_t m = g.idx(i, j, l);
                s += g.weight(l) * std::real(f.c[m] * std::conj(h.c[m]));
            }
    return g.volume() * s;
}

double l2_norm(const SpectralVector& u) {
    return std::sqrt(l2_norm_sq(u.u1) + l2_norm_sq(u.u2) + l2_norm_sq(u.u3));
}

double mean(const SpectralScalar& f) { return f.c[0].real(); }
double integral(const SpectralScalar& f) { return f.grid->volume() * f.c[0].real(); }

double lp_norm_physical(const Grid& g, const std::vector<double>& v, double p) {
    if (std::isinf(p)) return linf_norm_physical(v);
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s * g.volume() / double(v.size()), 1.0 / p);
}

double linf_norm_physical(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double linf_norm(const SpectralScalar& f) { return linf_norm_physical(to_physical(f)); }

SpectralScalar divergence(const SpectralVector& u, double shear) {
    const Grid& g = *u.u1.grid;
    SpectralScalar out(u.u1.grid);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double k2 = eff_k2(g, i, j, shear);
            for (int l = 0; l < g.nzh; ++l) {
                std::size_t m = g.idx(i, j, l);
                out.c[m] = cplx(0, 1) * (g.kx[i] * u.u1.c[m] + k2 * u.u2.c[m] + g.kz[l] * u.u3.c[m]);
            }
        }
    return out;
}

SpectralVector leray(const SpectralVector& u, double shear) {
    const Grid& g = *u.u1.grid;
    SpectralVector out(u.u1.grid);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double K[3] = {g.kx[i], eff_k2(g, i, j, shear), 0.0};
            for (int l = 0; l < g.nzh; ++l) {
                std::size_t m = g.idx(i, j, l);
                double k3 = g.kz[l];
                double r = K[0] * K[0] + K[1] * K[1] + k3 * k3;
                if (r == 0.0) continue;
                cplx kd = K[0] * u.u1.c[m] + K[1] * u.u2.c[m] + k3 * u.u3.c[m];
                cplx s = kd / r;
                out.u1.c[m] = u.u1.c[m] - K[0] * s;
                out.u2.c[m] = u.u2.c[m] - K[1] * s;
                out.u3.c[m] = u.u3.c[m] - k3 * s;
            }
        }
    return out;
}

double grad_l2_norm(const SpectralVector& u, double shear) {
    const Grid& g = *u.u1.grid;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double k2 = eff_k2(g, i, j, shear);
            for (int l = 0; l < g.nzh; ++l) {
                std::size_t m = g.idx(i, j, l);
                double r = g.kx[i] * g.kx[i] + k2 * k2 + g.kz[l] * g.kz[l];
                s += g.weight(l) * r * (std::norm(u.u1.c[m]) + std::norm(u.u2.c[m]) + std::norm(u.u3.c[m]));
            }
        }
    return std::sqrt(g.volume() * s);
}

double hermitian_defect(const SpectralScalar& f) {
    const Grid& g = *f.grid;
    double d = 0.0;
    for (int l : {0, g.nz / 2}) {
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                int ci = (g.nx - i) % g.nx, cj = (g.ny - j) % g.ny;
                d = std::max(d, std::abs(f.c[g.idx(i, j, l)] - std::conj(f.c[g.idx(ci, cj, l)])));
            }
    }
    return d;
}

void enforce_hermitian(SpectralScalar& f) {
    const Grid& g = *f.grid;
    for (int l : {0, g.nz / 2})
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                int ci = (g.nx - i) % g.nx, cj = (g.ny - j) % g.ny;
                cplx a = f.c[g.idx(i, j, l)], b = f.c[g.idx(ci, cj, l)];
                cplx s = 0.5 * (a + std::conj(b));
                f.c[g.idx(i, j, l)] = s;
                f.c[g.idx(ci, cj, l)] = std::conj(s);
            }
}

Fft1d::Fft1d(int n_) : n(n_) {
    if (n < 2 || n % 2) throw std::invalid_argument("Fft1d needs an even size");
}

std::vector<cplx> Fft1d::forward(const std::vector<double>& v) const {
    std::vector<double> in(v);
    std::vector<cplx> out(n / 2 + 1);
    fftw_plan p;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        p = fftw_plan_dft_r2c_1d(n, in.data(), fc(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(p);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(p);
    }
    for (auto& z : out) z /= double(n);
    out[n / 2] = 0.0;
    return out;
}

std::vector<double> Fft1d::inverse(const std::vector<cplx>& c) const {
    std::vector<cplx> in(c);
    std::vector<double> out(n);
    fftw_plan p;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        p = fftw_plan_dft_c2r_1d(n, fc(in.data()), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(p);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(p);
    }
    return out;
}

namespace {
struct Plan2d {
    fftw_plan fwd, inv;
};
Plan2d plan2d(int ny, int nz) {
    std::vector<double> r(std::size_t(ny) * nz);
    std::vector<cplx> c(std::size_t(ny) * (nz / 2 + 1));
    std::lock_guard<std::mutex> lock(plan_mutex());
    return {fftw_plan_dft_r2c_2d(ny, nz, r.data(), fc(c.data()), kFlags),
            fftw_plan_dft_c2r_2d(ny, nz, fc(c.data()), r.data(), kFlags)};
}
Plan2d& cached_plan2d(int ny, int nz) {
    static std::mutex m;
    static std::vector<std::pair<std::pair<int, int>, Plan2d>> cache;
    std::lock_guard<std::mutex> lock(m);
    for (auto& e : cache)
        if (e.first == std::make_pair(ny, nz)) return e.second;
    cache.emplace_back(std::make_pair(ny, nz), plan2d(ny, nz));
    return cache.back().second;
}
}  // namespace

Fft2d::Fft2d(int ny_, int nz_) : ny(ny_), nz(nz_), nzh(nz_ / 2 + 1) { cached_plan2d(ny, nz); }

void Fft2d::forward(std::vector<double>& v, std::vector<cplx>& out) const {
    out.resize(std::size_t(ny) * nzh);
    fftw_execute_dft_r2c(cached_plan2d(ny, nz).fwd, v.data(), fc(out.data()));
    const double s = 1.0 / (double(ny) * nz);
    for (auto& z : out) z *= s;
}

void Fft2d::inverse(const std::vector<cplx>& c, std::vector<double>& out, std::vector<cplx>& scratch) const {
    out.resize(std::size_t(ny) * nz);
    scratch.assign(c.begin(), c.end());
    fftw_execute_dft_c2r(cached_plan2d(ny, nz).inv, fc(scratch.data()), out.data());
}

}  // namespace pkslab
