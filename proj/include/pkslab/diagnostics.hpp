#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkslab/config.hpp"
#include "pkslab/solver.hpp"

namespace pkslab {

// Squared instantaneous norms of one tracked field: |f|^2, |grad f|^2, |grad Delta^{-1} d_x f|^2.
struct Tracked {
    double l2 = 0.0, grad = 0.0, gil = 0.0;
};

// Fields entering the X_a based functionals (E2, E4, E5).
enum XField : int {
    X_DXX_N, X_DZZ_N, X_LAP_U2, X_DX_W2, X_DY_W2, X_DZ_W2,  // E2, weight a
    X_DXX_N_B, X_DXDZ_N,                                     // E4, weight 3a/2
    X_DXX_U2, X_DXX_U3,                                      // E5, weight 3a/2
    X_COUNT
};

// Fields entering the Y_0 based functionals (E1).
enum YField : int {
    Y_DZZ_N0NEQ, Y_U20, Y_U30, Y_GRAD_U20, Y_GRAD_U30, Y_LAP_U20, Y_LAP_U30_W, Y_TILDE, Y_LAP_TILDE,
    Y_COUNT
};

struct NormRecord {
    double t = 0.0;
    double mass = 0.0;
    double n_linf = 0.0, n_min = 0.0, n_l2 = 0.0;
    double n00_l2 = 0.0, n0neq_l2 = 0.0, dz_n0neq_l2 = 0.0, dzz_n0neq_l2 = 0.0;
    double nneq_l2 = 0.0, dxx_nneq_l2 = 0.0, dzz_nneq_l2 = 0.0, dxdz_nneq_l2 = 0.0;
    double u10_h2 = 0.0, u20_h2 = 0.0, u30_h2 = 0.0;
    double w2neq_l2 = 0.0, dx_w2neq_l2 = 0.0, dy_w2neq_l2 = 0.0, dz_w2neq_l2 = 0.0;
    double lap_u2neq_l2 = 0.0, dxx_u2neq_l2 = 0.0, dxx_u3neq_l2 = 0.0;
    double div_res = 0.0;      // |div_L u| / |grad_L u|
    double tail_frac = 0.0;
    double edge_density = 0.0;  // max |n| in the outer tenth of the y-period, relative to |n|_inf
    double blowup_functional = 0.0;
    // |omega2_neq|^2 + |d_y u2_neq|^2 against sum |(dx,dz)(u1,u3)_neq|^2
    double vel_id_lhs = 0.0, vel_id_rhs = 0.0;
    // split companion
    double split_residual = 0.0;  // |hat + tilde - u1_0| / max(|u1_0|, tiny)
    double min_dyV = 1.0;
    double w_l2 = 0.0;            // |W|, W = u2_neq + kappa u3_neq
    double w_defect = 0.0;        // |W - u2_neq - kappa u3_neq|
    // E1 ingredients
    double dz_grad_c0neq_l2 = 0.0;
    double hat_h4 = 0.0, grad_hat_h4 = 0.0, dt_hat_l2 = 0.0, lap_dt_hat_l2 = 0.0;
    std::array<Tracked, X_COUNT> x{};
    std::array<Tracked, Y_COUNT> y{};
    double E1 = 0.0, E2 = 0.0, E3 = 0.0, E4 = 0.0, E5 = 0.0;
    std::string status = "running";
};

NormRecord instantaneous_norms(const SimState& s, const SimConfig& cfg);

// mode-resolved Pythagoras defect |n|^2 - (|n00|^2 + |n0neq|^2 + |nneq|^2), relative
double pythagoras_defect(const NormRecord& r);
double velocity_identity_defect(const NormRecord& r);

struct EnergyLedger {
    bool started = false;
    double t_last = 0.0;
    double A = 1.0, a = 0.1, eps = 0.4;
    NormRecord last;
    // X_a: sup_t e^{2wt}|f|^2 and int e^{2wt}(...) for each tracked field
    std::array<double, X_COUNT> x_sup{}, x_int_gil{}, x_int_l2{}, x_int_grad{};
    std::array<double, Y_COUNT> y_sup{}, y_int_grad{};
    double sup_n00 = 0.0, sup_dz_grad_c0neq = 0.0, int_dz_n0neq = 0.0;
    double sup_hat_h4 = 0.0, int_grad_hat_h4 = 0.0, sup_dt_hat = 0.0, sup_lap_dt_hat = 0.0;
    double sup_n_linf = 0.0;

    double weight_rate(int field) const;  // a A^{-1/3} or (3a/2) A^{-1/3}
    double x_norm(int field) const;
    double y_norm(int field) const;
    double E1() const;
    double E2() const;
    double E3() const { return sup_n_linf; }
    double E4() const;
    double E5() const;
};

EnergyLedger make_ledger(double A, double a, double eps0);
// trapezoidal accumulation; throws std::invalid_argument on non-increasing t
void update_ledger(EnergyLedger& L, NormRecord& rec);

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPositive : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitOptions {
    double t_min = 1.0;
    double rel_upper = 0.0;  // 0: no window; otherwise keep v/v0 in [rel_lower, rel_upper]
    double rel_lower = 0.0;
    int min_samples = 10;
};

struct FitResult {
    double rate = 0.0;
    double r2 = 0.0;
    int samples = 0;
};

FitResult fit_dissipation_rate(const std::vector<double>& t, const std::vector<double>& v,
                               const FitOptions& opt = FitOptions{});

// One explicit companion update: the split fields under frozen (u2_0, u3_0) and a given
// tilde forcing, advanced by the same integrating-factor scheme as the main solver.
struct SplitInputs {
    std::vector<cplx> u20, u30, forcing;  // (y,z) coefficient slices
};
void evolve_liftup_split(const Grid& g, LiftUpSplit& split, const SplitInputs& in, double dt, double A,
                         bool liftup = true, bool diffusion = true);
// kappa = d_z V / d_y V with V = y + hat/A, on the (y,z) grid
std::vector<double> split_kappa(const Grid& g, const LiftUpSplit& split, double A, double* min_dyV = nullptr);

}  // namespace pkslab
