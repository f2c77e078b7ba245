#pragma once

#include <cstdint>

#include "dzofl/channel.hpp"
#include "dzofl/perturbation.hpp"
#include "dzofl/quantizer.hpp"
#include "dzofl/schedule.hpp"
#include "dzofl/tasks.hpp"
#include "dzofl/types.hpp"

namespace dzofl {

// Constants of the convergence analysis, assembled from problem data:
//   q  = 1 - (1-p)^N     probability the round is not voided
//   c1 = 2 q alpha2      gain of the estimator mean:
//                        E[g_k | history] = c1 gamma_k (grad F + bias)
//   c2 = 4 q (sigma+1)^2 alpha3^4 N^2 Lxi2
//                        second-moment coefficient: E||g_k||^2 <= c2 gamma_k^2
//   c3 = alpha1 alpha3^3 N / (2 alpha2)
//                        bias coefficient: ||bias_k|| <= c3 gamma_k
// where Lxi2 = max_i E[L_i(xi)^2] for the device loss Lipschitz constants.
struct TheoryConstants {
    double p = 1.0;
    int num_devices = 1;
    double alpha1 = 0.0;  // max device Hessian norm bound
    double alpha2 = 0.0;  // per-component second moment of the perturbation
    double alpha3 = 1.0;  // third moment of ||Phi||
    double sigma = 0.0;   // quantizer relative distortion bound
    double smoothness = 0.0;       // L of the summed objective
    double loss_lipschitz_sq = 0.0; // Lxi2
    double q = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

TheoryConstants make_constants(double p, int num_devices, double alpha1, double alpha2,
                               double alpha3, double sigma, double loss_lipschitz_sq,
                               double smoothness);

// Convenience overload wiring the pieces of a run together.
TheoryConstants make_constants(const GlobalObjective& obj, const ErasureChannel& ch,
                               const QuantizerSpec& quant, const PerturbationStream& pert);

// Finite-horizon bound on the schedule-weighted average of the expected
// squared gradient norm over rounds 0..K:
//   sum_k alpha_k gamma_k E||grad F(theta_k)||^2 / sum_k alpha_k gamma_k
//     <= prefactor(K) * (A0 + A1/(u1+3u2-1) + A2/(2(u1+u2)-1))
// with A0 = 2 delta0 / (c1 alpha0 gamma0), A1 = (u1+3u2)(c3 gamma0)^2,
// A2 = 2 (u1+u2) c2 alpha0 gamma0 L / c1, and prefactor
// (1-u3)/((K+2)^(1-u3)-1) for u3 = u1+u2 < 1, or 1/ln(K+2) at u3 = 1.
// delta0 is F(theta_0) minus the optimal value. Throws DomainError when the
// exponents are outside the admissible range or delta0 < 0.
double rate_bound(const TheoryConstants& tc, const StepSchedule& s, double delta0,
                  std::uint64_t horizon);

// Closed-form bounds on the schedule partial sums over k = 0..K that drive
// the rate bound. The two upper bounds hold for every K (the series
// converge); the lower bound grows with K.
struct PartialSumBounds {
    double alpha_gamma_cubed_upper = 0.0; // sum alpha_k gamma_k^3 <= this
    double alpha_sq_gamma_sq_upper = 0.0; // sum alpha_k^2 gamma_k^2 <= this
    double alpha_gamma_lower = 0.0;       // sum alpha_k gamma_k >= this
};

PartialSumBounds partial_sum_bounds(const StepSchedule& s, std::uint64_t horizon);

struct BiasOracleOptions {
    bool allow_monte_carlo = false; // permit approximate sampling for dim > 12
    std::uint64_t monte_carlo_samples = 200000;
    std::uint64_t seed = 9001;
};

// Exact bias of the two-point estimator at (theta, gamma): enumerates all
// 2^d sign patterns of the perturbation and returns
//   E_Phi[ Phi (F(theta+gamma Phi) - F(theta-gamma Phi)) ] / (2 gamma alpha2)
//     - grad F(theta).
// Deterministic (fixed summation order). dim > 12 requires the Monte Carlo
// flag; otherwise a ConfigError is thrown.
Vector bias_oracle(const GlobalObjective& obj, const Vector& theta, double gamma_val,
                   const BiasOracleOptions& opts = {});

} // namespace dzofl
