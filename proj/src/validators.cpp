#include "dzofl/validators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"
#include "dzofl/theory.hpp"

namespace dzofl {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// per-replication reseeding for checks that execute whole runs
EngineConfig reseeded(const EngineConfig& base, std::uint64_t rep) {
    EngineConfig cfg = base;
    cfg.perturbation.seed = rng::mix(base.perturbation.seed, rep, 1);
    cfg.channel.seed = rng::mix(base.channel.seed, rep, 2);
    cfg.quantizer_seed = rng::mix(base.quantizer_seed, rep, 3);
    cfg.xi.seed = rng::mix(base.xi.seed, rep, 4);
    return cfg;
}

} // namespace

CheckResult check_aggregation_mean(double p, int num_devices, std::uint64_t rounds,
                                   std::uint64_t seed) {
    ErasureChannel ch = make_channel(p, num_devices, seed);
    std::vector<double> v(static_cast<std::size_t>(num_devices));
    double total = 0.0;
    for (int i = 0; i < num_devices; ++i) {
        v[static_cast<std::size_t>(i)] = 1.0 + 0.1 * static_cast<double>(i + 1);
        total += v[static_cast<std::size_t>(i)];
    }

    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t k = 0; k < rounds; ++k) {
        std::map<int, double> received;
        for (int id : sample_received_set(ch, k))
            received.emplace(id, v[static_cast<std::size_t>(id - 1)]);
        double a = aggregate(received, num_devices);
        sum += a;
        sum_sq += a * a;
    }
    double n = static_cast<double>(rounds);
    double mean = sum / n;
    double var = std::max(sum_sq / n - mean * mean, 0.0);
    double se = std::sqrt(var / n);
    double expected = q_success(p, num_devices) * total;

    CheckResult r;
    r.name = "aggregation_unbiasedness";
    r.observed = mean;
    r.threshold = expected;
    r.stat_error = se;
    r.pass = std::fabs(mean - expected) <= 4.0 * se;
    r.detail = "mean " + fmt(mean) + " vs q*sum(v) " + fmt(expected) + " (se " + fmt(se) +
               ", p=" + fmt(p) + ", N=" + std::to_string(num_devices) + ")";
    return r;
}

CheckResult check_estimator_mean(const EngineConfig& cfg, double gamma_val,
                                 std::uint64_t reps) {
    validate(cfg);
    const GlobalObjective& obj = *cfg.objective;
    const int d = obj.dim();
    const Vector theta = obj.initial_point;

    TheoryConstants tc = make_constants(obj, cfg.channel, cfg.uplink, cfg.perturbation);
    const double scale = 1.0 / (tc.c1 * gamma_val);

    Vector sum = Vector::Zero(d), sum_sq = Vector::Zero(d);
    for (std::uint64_t k = 0; k < reps; ++k) {
        Vector g = estimator_draw(cfg, theta, gamma_val, k).g * scale;
        sum += g;
        sum_sq += g.cwiseProduct(g);
    }
    double n = static_cast<double>(reps);
    Vector mean = sum / n;
    Vector var = (sum_sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
    double se = std::sqrt(var.sum() / n); // standard error of the vector mean's norm

    double err = (mean - obj.gradient(theta)).norm();
    CheckResult r;
    r.name = "estimator_mean";
    r.observed = err;
    r.threshold = 4.0 * se;
    r.stat_error = se;
    r.pass = err <= 4.0 * se;
    r.detail = "||mean g/(c1 gamma) - grad F|| = " + fmt(err) + " vs 4 se = " + fmt(4.0 * se) +
               " over " + std::to_string(reps) + " draws";
    return r;
}

CheckResult check_second_moment(const EngineConfig& cfg, const std::vector<double>& gammas,
                                std::uint64_t reps) {
    validate(cfg);
    const GlobalObjective& obj = *cfg.objective;
    const Vector theta = obj.initial_point;
    TheoryConstants tc = make_constants(obj, cfg.channel, cfg.uplink, cfg.perturbation);

    CheckResult r;
    r.name = "estimator_second_moment";
    r.pass = true;
    std::string parts;
    double worst_ratio = 0.0;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        double gv = gammas[gi];
        double acc = 0.0;
        for (std::uint64_t t = 0; t < reps; ++t) {
            // distinct counter block per gamma keeps the draws independent
            std::uint64_t k = static_cast<std::uint64_t>(gi) * reps + t;
            acc += estimator_draw(cfg, theta, gv, k).g.squaredNorm();
        }
        double mean = acc / static_cast<double>(reps);
        double bound = tc.c2 * gv * gv;
        if (mean > bound) r.pass = false;
        worst_ratio = std::max(worst_ratio, mean / bound);
        if (!parts.empty()) parts += ", ";
        parts += "gamma " + fmt(gv) + ": " + fmt(mean) + " <= " + fmt(bound);
    }
    r.observed = worst_ratio; // fraction of the bound used, worst gamma
    r.threshold = 1.0;
    r.detail = "E||g||^2 vs c2 gamma^2 (" + parts + ")";
    return r;
}

CheckResult check_bias_bound(const EngineConfig& cfg, const std::vector<double>& gammas,
                             int num_thetas, std::uint64_t theta_seed) {
    validate(cfg);
    const GlobalObjective& obj = *cfg.objective;
    const int d = obj.dim();
    if (d > 12)
        throw ConfigError("check_bias_bound: exact enumeration needs dim <= 12, got " +
                          std::to_string(d));
    if (gammas.size() < 2) throw ConfigError("check_bias_bound: need at least two gammas");
    TheoryConstants tc = make_constants(obj, cfg.channel, cfg.uplink, cfg.perturbation);

    CheckResult r;
    r.name = "estimator_bias";
    r.pass = true;
    double worst_ratio = 0.0;

    for (int t = 0; t < num_thetas; ++t) {
        Vector theta(d);
        for (int j = 0; j < d; ++j) {
            std::uint64_t a = rng::mix(theta_seed, static_cast<std::uint64_t>(t),
                                       static_cast<std::uint64_t>(2 * j));
            std::uint64_t b = rng::mix(theta_seed, static_cast<std::uint64_t>(t),
                                       static_cast<std::uint64_t>(2 * j + 1));
            theta[j] = rng::to_gaussian(a, b);
        }
        for (double gv : gammas) {
            double bnorm = bias_oracle(obj, theta, gv).norm();
            double bound = tc.c3 * gv;
            if (bnorm > bound) r.pass = false;
            worst_ratio = std::max(worst_ratio, bnorm / bound);
        }
    }

    // gamma scaling at the first probe point: for smooth objectives the
    // two-sided estimator's bias is quadratic in gamma, so halving gamma
    // divides the norm by ~4
    Vector ref(d);
    for (int j = 0; j < d; ++j) {
        std::uint64_t a = rng::mix(theta_seed, 0, static_cast<std::uint64_t>(2 * j));
        std::uint64_t b = rng::mix(theta_seed, 0, static_cast<std::uint64_t>(2 * j + 1));
        ref[j] = rng::to_gaussian(a, b);
    }
    std::string scaling;
    for (std::size_t i = 0; i + 1 < gammas.size(); ++i) {
        double hi = bias_oracle(obj, ref, gammas[i]).norm();
        double lo = bias_oracle(obj, ref, gammas[i + 1]).norm();
        if (!scaling.empty()) scaling += ", ";
        // constant-Hessian objectives have exactly zero bias; the ratio test
        // is vacuous there (0/0), so require only that both norms sit at
        // enumeration roundoff level
        double floor_i = 1e-9 * tc.c3 * gammas[i + 1];
        if (hi <= floor_i && lo <= floor_i) {
            scaling += "zero-bias branch (|b| <= " + fmt(floor_i) + ")";
            continue;
        }
        double expected = (gammas[i] * gammas[i]) / (gammas[i + 1] * gammas[i + 1]);
        double ratio = hi / lo;
        if (!(std::fabs(ratio - expected) <= 0.25 * expected)) r.pass = false;
        scaling += fmt(ratio) + " (expect ~" + fmt(expected) + ")";
    }

    r.observed = worst_ratio;
    r.threshold = 1.0;
    r.detail = "worst ||bias||/(c3 gamma) = " + fmt(worst_ratio) + " over " +
               std::to_string(num_thetas) + " points; halving ratios " + scaling;
    return r;
}

CheckResult check_rate_bound(const EngineConfig& cfg, const std::vector<std::uint64_t>& horizons,
                             std::uint64_t reps) {
    validate(cfg);
    const GlobalObjective& obj = *cfg.objective;
    CheckResult r;
    r.name = "weighted_gradient_rate_bound";
    if (!obj.known_minimum) {
        r.applicable = false;
        r.detail = "bound check unavailable: task has no analytic minimum";
        return r;
    }
    if (horizons.empty()) throw ConfigError("check_rate_bound: no horizons given");

    std::uint64_t k_max = *std::max_element(horizons.begin(), horizons.end());
    TheoryConstants tc = make_constants(obj, cfg.channel, cfg.uplink, cfg.perturbation);
    double delta0 = obj.value(obj.initial_point) - *obj.known_minimum;

    // weighted mean per horizon, averaged across replications
    std::vector<double> ratio_sum(horizons.size(), 0.0);
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
        EngineConfig run_cfg = reseeded(cfg, rep);
        run_cfg.grad_log_every = 1;
        TrainState st = make_initial_state(run_cfg);
        double num = 0.0, den = 0.0;
        for (std::uint64_t k = 0; k <= k_max; ++k) {
            double w = alpha(run_cfg.schedule, k) * gamma(run_cfg.schedule, k);
            num += w * true_gradient_norm_sq(obj, st.theta);
            den += w;
            dzofl_round(run_cfg, st);
            for (std::size_t h = 0; h < horizons.size(); ++h)
                if (horizons[h] == k) ratio_sum[h] += num / den;
        }
    }

    r.pass = true;
    double worst = 0.0;
    std::string parts;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        double avg = ratio_sum[h] / static_cast<double>(reps);
        double bound = rate_bound(tc, cfg.schedule, delta0, horizons[h]);
        if (avg > bound) r.pass = false;
        worst = std::max(worst, avg / bound);
        if (!parts.empty()) parts += ", ";
        parts += "K=" + std::to_string(horizons[h]) + ": " + fmt(avg) + " <= " + fmt(bound);
    }

    // numeric partial sums must respect their closed-form bounds
    double s_ag = 0.0, s_ag3 = 0.0, s_a2g2 = 0.0;
    for (std::uint64_t k = 0; k <= k_max; ++k) {
        double a = alpha(cfg.schedule, k), g = gamma(cfg.schedule, k);
        s_ag += a * g;
        s_ag3 += a * g * g * g;
        s_a2g2 += a * a * g * g;
    }
    PartialSumBounds pb = partial_sum_bounds(cfg.schedule, k_max);
    bool sums_ok = s_ag3 <= pb.alpha_gamma_cubed_upper &&
                   s_a2g2 <= pb.alpha_sq_gamma_sq_upper && s_ag >= pb.alpha_gamma_lower;
    if (!sums_ok) r.pass = false;

    r.observed = worst;
    r.threshold = 1.0;
    r.detail = "weighted mean vs bound (" + parts + "); partial sums " +
               (sums_ok ? "within" : "OUTSIDE") + " closed-form bounds";
    return r;
}

CheckResult check_training_decay(const EngineConfig& cfg, std::uint64_t horizon,
                                 std::uint64_t reps, double window_frac, double target_ratio) {
    validate(cfg);
    if (!(window_frac > 0.0 && window_frac <= 1.0))
        throw ConfigError("check_training_decay: window_frac must be in (0, 1]");

    const std::uint64_t rounds = horizon + 1;
    const std::uint64_t window =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(window_frac *
                                                              static_cast<double>(rounds)));
    const std::uint64_t window_start = rounds - window;

    double initial_mean = 0.0, trailing_mean = 0.0;
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
        EngineConfig run_cfg = reseeded(cfg, rep);
        run_cfg.grad_log_every = 1;
        TrainState st = make_initial_state(run_cfg);
        double trail = 0.0;
        initial_mean += true_gradient_norm_sq(*cfg.objective, st.theta);
        for (std::uint64_t k = 0; k < rounds; ++k) {
            if (k >= window_start) trail += true_gradient_norm_sq(*cfg.objective, st.theta);
            dzofl_round(run_cfg, st);
        }
        trailing_mean += trail / static_cast<double>(window);
    }
    initial_mean /= static_cast<double>(reps);
    trailing_mean /= static_cast<double>(reps);

    CheckResult r;
    r.name = "training_gradient_decay";
    r.observed = trailing_mean;
    r.threshold = target_ratio * initial_mean;
    r.pass = trailing_mean < r.threshold;
    r.detail = "trailing ||grad F||^2 " + fmt(trailing_mean) + " vs " + fmt(target_ratio) +
               " * initial " + fmt(initial_mean) + " over " + std::to_string(reps) + " runs";
    return r;
}

} // namespace dzofl
