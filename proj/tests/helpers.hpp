#pragma once

#include <cmath>
#include <functional>

#include "pkslab/spectral.hpp"

namespace th {

using namespace pkslab;

inline SpectralScalar sample(const GridPtr& g, const std::function<double(double, double, double)>& f) {
    std::vector<double> v(g->nphys());
    for (int i = 0; i < g->nx; ++i)
        for (int j = 0; j < g->ny; ++j)
            for (int l = 0; l < g->nz; ++l) v[g->pidx(i, j, l)] = f(g->x(i), g->y(j), g->z(l));
    return from_physical(g, v);
}

inline double max_abs_diff(const SpectralScalar& a, const SpectralScalar& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.c.size(); ++k) m = std::max(m, std::abs(a.c[k] - b.c[k]));
    return m;
}

inline double max_abs(const SpectralScalar& a) {
    double m = 0.0;
    for (const auto& v : a.c) m = std::max(m, std::abs(v));
    return m;
}

inline double rel(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

// residual relative to the reference's scale
inline double rel_diff(const SpectralScalar& a, const SpectralScalar& ref) {
    const double s = l2_norm(ref);
    return s > 0.0 ? l2_norm(a - ref) / s : l2_norm(a);
}

}  // namespace th
