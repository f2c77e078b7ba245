#include "dzofl/theory.hpp"

#include <cmath>
#include <string>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"

namespace dzofl {

TheoryConstants make_constants(double p, int num_devices, double alpha1, double alpha2,
                               double alpha3, double sigma, double loss_lipschitz_sq,
                               double smoothness) {
    if (alpha2 <= 0.0) throw ConfigError("make_constants: alpha2 must be positive");
    if (sigma < 0.0) throw ConfigError("make_constants: sigma must be >= 0");
    TheoryConstants tc;
    tc.p = p;
    tc.num_devices = num_devices;
    tc.alpha1 = alpha1;
    tc.alpha2 = alpha2;
    tc.alpha3 = alpha3;
    tc.sigma = sigma;
    tc.smoothness = smoothness;
    tc.loss_lipschitz_sq = loss_lipschitz_sq;
    tc.q = q_success(p, num_devices);
    double n = static_cast<double>(num_devices);
    tc.c1 = 2.0 * tc.q * alpha2;
    tc.c2 = 4.0 * tc.q * (sigma + 1.0) * (sigma + 1.0) * std::pow(alpha3, 4) * n * n *
            loss_lipschitz_sq;
    tc.c3 = alpha1 * std::pow(alpha3, 3) * n / (2.0 * alpha2);
    return tc;
}

TheoryConstants make_constants(const GlobalObjective& obj, const ErasureChannel& ch,
                               const QuantizerSpec& quant, const PerturbationStream& pert) {
    if (pert.dim != obj.dim())
        throw ConfigError("make_constants: perturbation dim " + std::to_string(pert.dim) +
                          " does not match task dim " + std::to_string(obj.dim()));
    if (ch.num_devices != obj.num_devices())
        throw ConfigError("make_constants: channel has " + std::to_string(ch.num_devices) +
                          " devices, task has " + std::to_string(obj.num_devices()));
    PerturbationMoments pm = moments(pert);
    return make_constants(ch.p, ch.num_devices, obj.hessian_bound, pm.alpha2, pm.alpha3,
                          quant.sigma(), obj.loss_lipschitz_sq, obj.smoothness);
}

double rate_bound(const TheoryConstants& tc, const StepSchedule& s, double delta0,
                  std::uint64_t horizon) {
    double u1 = s.upsilon1, u2 = s.upsilon2;
    double u3 = u1 + u2;
    if (u3 > 1.0) throw DomainError("rate_bound: upsilon1+upsilon2 > 1 is outside the analysis");
    if (!(u1 + 3.0 * u2 > 1.0))
        throw DomainError("rate_bound: requires upsilon1+3*upsilon2 > 1");
    if (!(2.0 * u3 > 1.0))
        throw DomainError("rate_bound: requires upsilon1+upsilon2 > 0.5");
    if (delta0 < 0.0) throw DomainError("rate_bound: delta0 must be >= 0");
    if (tc.c1 <= 0.0) throw DomainError("rate_bound: c1 must be positive");

    double a0g0 = s.alpha0 * s.gamma0;
    double A0 = 2.0 * delta0 / (tc.c1 * a0g0);
    double A1 = (u1 + 3.0 * u2) * (tc.c3 * s.gamma0) * (tc.c3 * s.gamma0);
    double A2 = 2.0 * u3 * tc.c2 * a0g0 * tc.smoothness / tc.c1;
    double bracket = A0 + A1 / (u1 + 3.0 * u2 - 1.0) + A2 / (2.0 * u3 - 1.0);

    double kp2 = static_cast<double>(horizon) + 2.0;
    double prefactor = (u3 < 1.0) ? (1.0 - u3) / (std::pow(kp2, 1.0 - u3) - 1.0)
                                  : 1.0 / std::log(kp2);
    return prefactor * bracket;
}

PartialSumBounds partial_sum_bounds(const StepSchedule& s, std::uint64_t horizon) {
    double u1 = s.upsilon1, u2 = s.upsilon2;
    double u3 = u1 + u2;
    if (!(u1 + 3.0 * u2 > 1.0))
        throw DomainError("partial_sum_bounds: requires upsilon1+3*upsilon2 > 1");
    if (!(2.0 * u3 > 1.0))
        throw DomainError("partial_sum_bounds: requires upsilon1+upsilon2 > 0.5");
    if (u3 > 1.0)
        throw DomainError("partial_sum_bounds: upsilon1+upsilon2 > 1 is outside the analysis");

    PartialSumBounds b;
    double a0 = s.alpha0, g0 = s.gamma0;
    b.alpha_gamma_cubed_upper = a0 * g0 * g0 * g0 * (u1 + 3.0 * u2) / (u1 + 3.0 * u2 - 1.0);
    b.alpha_sq_gamma_sq_upper = a0 * a0 * g0 * g0 * (2.0 * u3) / (2.0 * u3 - 1.0);
    double kp2 = static_cast<double>(horizon) + 2.0;
    b.alpha_gamma_lower = (u3 < 1.0)
                              ? a0 * g0 / (1.0 - u3) * (std::pow(kp2, 1.0 - u3) - 1.0)
                              : a0 * g0 * std::log(kp2);
    return b;
}

Vector bias_oracle(const GlobalObjective& obj, const Vector& theta, double gamma_val,
                   const BiasOracleOptions& opts) {
    const int d = obj.dim();
    if (theta.size() != d)
        throw ConfigError("bias_oracle: theta dim does not match task dim");
    if (!(gamma_val > 0.0)) throw ConfigError("bias_oracle: gamma must be positive");

    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    const double alpha2 = 1.0 / static_cast<double>(d);
    Vector acc = Vector::Zero(d);
    Vector dir(d);

    auto add_pattern = [&](const Vector& ph) {
        double df = obj.value(theta + gamma_val * ph) - obj.value(theta - gamma_val * ph);
        acc += ph * df;
    };

    if (d <= 12) {
        const std::uint64_t patterns = std::uint64_t{1} << d;
        for (std::uint64_t mask = 0; mask < patterns; ++mask) {
            for (int j = 0; j < d; ++j)
                dir[j] = ((mask >> j) & 1u) ? scale : -scale;
            add_pattern(dir);
        }
        acc /= static_cast<double>(patterns);
    } else if (opts.allow_monte_carlo) {
        for (std::uint64_t t = 0; t < opts.monte_carlo_samples; ++t) {
            for (int j = 0; j < d; ++j) {
                std::uint64_t h = rng::mix(opts.seed, t, static_cast<std::uint64_t>(j));
                dir[j] = (h >> 63) ? scale : -scale;
            }
            add_pattern(dir);
        }
        acc /= static_cast<double>(opts.monte_carlo_samples);
    } else {
        throw ConfigError("bias_oracle: dim " + std::to_string(d) +
                          " exceeds the exact enumeration limit of 12; set the "
                          "Monte Carlo option for an approximate value");
    }

    return acc / (2.0 * gamma_val * alpha2) - obj.gradient(theta);
}

} // namespace dzofl
