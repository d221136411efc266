#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pkslab {

using cplx = std::complex<double>;

class FftPlans;

// Periodic box [0,2pi) x [-pi*ly, pi*ly) x [0,2pi), r2c layout (x, y, z/2+1).
struct Grid {
    int nx = 0, ny = 0, nz = 0;
    int nzh = 0;
    double ly = 1.0;
    double dealias_fraction = 2.0 / 3.0;

    std::vector<double> kx, ky, kz;      // wavenumber per storage index
    std::vector<int> jx, jy, jz;         // signed integer index
    std::vector<unsigned char> keep_x, keep_y, keep_z;
    int kmax_x = 0, kmax_y = 0, kmax_z = 0;  // largest retained |j|

    std::shared_ptr<FftPlans> plans;

    std::size_t nspec() const { return std::size_t(nx) * ny * nzh; }
    std::size_t nphys() const { return std::size_t(nx) * ny * nz; }
    std::size_t idx(int i, int j, int l) const { return (std::size_t(i) * ny + j) * nzh + l; }
    std::size_t pidx(int i, int j, int l) const { return (std::size_t(i) * ny + j) * nz + l; }
    double volume() const;
    double weight(int l) const { return (l == 0 || 2 * l == nz) ? 1.0 : 2.0; }
    bool kept(int i, int j, int l) const { return keep_x[i] && keep_y[j] && keep_z[l]; }
    double x(int i) const;
    double y(int j) const;
    double z(int l) const;
    // largest retained |k2|, i.e. the y band edge
    double k2_band() const { return kmax_y / ly; }
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int nx, int ny, int nz, double ly, double dealias_fraction = 2.0 / 3.0);

struct NonZeroMean : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Coefficients normalized so that f(x) = sum_k c_k e^{ik.x}.
struct SpectralScalar {
    GridPtr grid;
    std::vector<cplx> c;

    SpectralScalar() = default;
    explicit SpectralScalar(GridPtr g) : grid(std::move(g)), c(grid->nspec(), cplx(0.0, 0.0)) {}

    cplx& operator[](std::size_t m) { return c[m]; }
    const cplx& operator[](std::size_t m) const { return c[m]; }
    SpectralScalar& operator+=(const SpectralScalar& o);
    SpectralScalar& operator-=(const SpectralScalar& o);
    SpectralScalar& operator*=(double s);
};

SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b);
SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b);
SpectralScalar operator*(double s, SpectralScalar a);

struct SpectralVector {
    SpectralScalar u1, u2, u3;

    SpectralVector() = default;
    explicit SpectralVector(const GridPtr& g) : u1(g), u2(g), u3(g) {}
    SpectralScalar& operator[](int i) { return i == 0 ? u1 : (i == 1 ? u2 : u3); }
    const SpectralScalar& operator[](int i) const { return i == 0 ? u1 : (i == 1 ? u2 : u3); }
};

enum class Axis { x = 0, y = 1, z = 2 };
enum class ModeClass { zero, nonzero, zz_zero, zz_nonzero };

// Transforms. Physical arrays have layout (x, y, z), length nphys().
std::vector<double> to_physical(const SpectralScalar& f);
void to_physical(const SpectralScalar& f, std::vector<double>& out, std::vector<cplx>& scratch);
SpectralScalar from_physical(const GridPtr& g, const std::vector<double>& v);
void from_physical(const Grid& g, std::vector<double>& v, std::vector<cplx>& out);
void inverse_transform(const Grid& g, const std::vector<cplx>& c, std::vector<double>& out,
                       std::vector<cplx>& scratch);

// shear = t selects the sheared gradient (d_x, d_y - t d_x, d_z); t = 0 is the plain one
inline double eff_k2(const Grid& g, int i, int j, double shear) { return g.ky[j] - shear * g.kx[i]; }

SpectralScalar derivative(const SpectralScalar& f, Axis axis, int order, double shear = 0.0);
SpectralScalar laplacian(const SpectralScalar& f, double shear = 0.0);
SpectralScalar inv_laplacian(const SpectralScalar& f, double shear = 0.0, double tol = 1e-12);
SpectralScalar helmholtz_solve(const SpectralScalar& n, double shear = 0.0);
SpectralScalar project(const SpectralScalar& f, ModeClass cls);
SpectralScalar dealias(const SpectralScalar& f);
bool in_class(const Grid& g, int i, int l, ModeClass cls);

// Norms: L2 by Parseval, the rest by grid quadrature.
double l2_norm(const SpectralScalar& f);
double l2_norm_sq(const SpectralScalar& f);
double inner(const SpectralScalar& f, const SpectralScalar& g);
double l2_norm(const SpectralVector& u);
double mean(const SpectralScalar& f);
double integral(const SpectralScalar& f);
double lp_norm_physical(const Grid& g, const std::vector<double>& v, double p);
double linf_norm_physical(const std::vector<double>& v);
double linf_norm(const SpectralScalar& f);

// sheared divergence and Leray projection
SpectralScalar divergence(const SpectralVector& u, double shear = 0.0);
SpectralVector leray(const SpectralVector& u, double shear = 0.0);
double grad_l2_norm(const SpectralVector& u, double shear = 0.0);

// Max deviation from Hermitian symmetry on the self-conjugate planes.
double hermitian_defect(const SpectralScalar& f);
void enforce_hermitian(SpectralScalar& f);

// Small 1D/2D helpers used by the verifier and the lift-up companion.
struct Fft1d {
    int n;
    explicit Fft1d(int n);
    std::vector<cplx> forward(const std::vector<double>& v) const;  // normalized, n/2+1 entries
    std::vector<double> inverse(const std::vector<cplx>& c) const;
};

struct Fft2d {
    int ny, nz, nzh;
    Fft2d(int ny, int nz);
    void forward(std::vector<double>& v, std::vector<cplx>& out) const;
    void inverse(const std::vector<cplx>& c, std::vector<double>& out, std::vector<cplx>& scratch) const;
};

}  // namespace pkslab
