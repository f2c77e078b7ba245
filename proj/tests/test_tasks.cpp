#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"
#include "dzofl/tasks.hpp"

using namespace dzofl;

namespace {

Vector random_point(int d, std::uint64_t seed, double scale) {
    Vector v(d);
    for (int j = 0; j < d; ++j) {
        std::uint64_t a = rng::mix(seed, static_cast<std::uint64_t>(2 * j));
        std::uint64_t b = rng::mix(seed, static_cast<std::uint64_t>(2 * j + 1));
        v[j] = scale * rng::to_gaussian(a, b);
    }
    return v;
}

// central finite difference of the mean loss against the analytic gradient
void check_gradient_fd(const DeviceTask& task, const Vector& theta) {
    const int d = task.dim();
    const double h = 1e-5 * (1.0 + theta.norm());
    Vector g = task.gradient(theta);
    Vector fd(d);
    for (int j = 0; j < d; ++j) {
        Vector up = theta, down = theta;
        up[j] += h;
        down[j] -= h;
        fd[j] = (task.mean_loss(up) - task.mean_loss(down)) / (2.0 * h);
    }
    CHECK((fd - g).norm() <= 1e-5 * (1.0 + g.norm()));
}

void check_hessian_fd(const DeviceTask& task, const Vector& theta, const Vector& v) {
    const double h = 1e-5 * (1.0 + theta.norm());
    Vector hv = task.hessian_apply(theta, v);
    Vector fd = (task.gradient(theta + h * v) - task.gradient(theta - h * v)) / (2.0 * h);
    CHECK((fd - hv).norm() <= 1e-4 * (1.0 + hv.norm()));
}

} // namespace

TEST_CASE("xi sampling is a pure function of (seed, round, device)") {
    XiStream s{55};
    CHECK(xi_sample(s, 3, 1).key == xi_sample(s, 3, 1).key);
    CHECK(xi_sample(s, 3, 1).key != xi_sample(s, 3, 2).key);
    CHECK(xi_sample(s, 3, 1).key != xi_sample(s, 4, 1).key);
    CHECK(xi_sample(XiStream{56}, 3, 1).key != xi_sample(s, 3, 1).key);
}

TEST_CASE("task generators validate their arguments") {
    CHECK_THROWS_AS(make_quadratic_task(0, 3, 1), ConfigError);
    CHECK_THROWS_AS(make_quadratic_task(4, 0, 1), ConfigError);
    CHECK_THROWS_AS(make_nonconvex_task(-1, 3, 1), ConfigError);
    CHECK_THROWS_AS(make_logistic_task(4, 2, 0, 1), ConfigError);
}

TEST_CASE("task construction is deterministic in the seed") {
    auto a = make_quadratic_task(6, 3, 2024);
    auto b = make_quadratic_task(6, 3, 2024);
    auto c = make_quadratic_task(6, 3, 2025);
    CHECK((a.initial_point.array() == b.initial_point.array()).all());
    CHECK(a.smoothness == b.smoothness);
    CHECK(*a.known_minimum == *b.known_minimum);
    CHECK_FALSE((a.initial_point.array() == c.initial_point.array()).all());
    Vector probe = random_point(6, 91, 1.0);
    CHECK(a.value(probe) == b.value(probe));
}

TEST_CASE("loss queries are bit-deterministic and noise cancels in pairs") {
    auto obj = make_quadratic_task(5, 2, 77);
    XiStream xs{404};
    const DeviceTask& dev = *obj.devices[0];
    Vector theta = random_point(5, 13, 2.0);
    XiSample xi = xi_sample(xs, 9, 1);
    CHECK(dev.loss(theta, xi) == dev.loss(theta, xi));
    // different xi moves the loss (additive noise), mean_loss never moves
    XiSample xi2 = xi_sample(xs, 10, 1);
    CHECK(dev.loss(theta, xi) != dev.loss(theta, xi2));
    CHECK(dev.mean_loss(theta) == dev.mean_loss(theta));
    // the same-xi two-point difference is exactly the mean-loss difference
    Vector theta2 = random_point(5, 14, 2.0);
    CHECK(dev.loss(theta, xi) - dev.loss(theta2, xi) ==
          doctest::Approx(dev.mean_loss(theta) - dev.mean_loss(theta2)).epsilon(1e-12));
}

TEST_CASE("analytic derivatives match finite differences on all task families") {
    auto quad = make_quadratic_task(6, 3, 2024);
    auto noncvx = make_nonconvex_task(6, 3, 2024);
    auto logi = make_logistic_task(5, 2, 24, 2024);
    for (const GlobalObjective* obj : {&quad, &noncvx, &logi}) {
        for (std::uint64_t t = 0; t < 3; ++t) {
            Vector theta = random_point(obj->dim(), 100 + t, 1.5);
            Vector v = random_point(obj->dim(), 200 + t, 1.0);
            for (const auto& dev : obj->devices) {
                check_gradient_fd(*dev, theta);
                check_hessian_fd(*dev, theta, v);
            }
        }
    }
}

TEST_CASE("global objective is the sum of its device objectives") {
    auto obj = make_nonconvex_task(5, 4, 321);
    Vector theta = random_point(5, 17, 1.0);
    double direct = 0.0;
    Vector grad = Vector::Zero(5);
    for (const auto& dev : obj.devices) {
        direct += dev->mean_loss(theta);
        grad += dev->gradient(theta);
    }
    CHECK(obj.value(theta) == doctest::Approx(direct).epsilon(1e-15));
    CHECK((obj.gradient(theta) - grad).norm() == 0.0);
    CHECK(true_gradient_norm_sq(obj, theta) == obj.gradient(theta).squaredNorm());
}

TEST_CASE("dimension mismatches are rejected") {
    auto obj = make_quadratic_task(4, 2, 5);
    Vector wrong = Vector::Zero(5);
    CHECK_THROWS_AS(true_gradient_norm_sq(obj, wrong), ConfigError);
}

TEST_CASE("certified Lipschitz constants hold on the test region") {
    auto quad = make_quadratic_task(5, 3, 31);
    auto noncvx = make_nonconvex_task(5, 3, 31);
    auto logi = make_logistic_task(4, 2, 20, 31);
    XiStream xs{404};
    for (const GlobalObjective* obj : {&quad, &noncvx, &logi}) {
        const int d = obj->dim();
        for (const auto& dev : obj->devices) {
            double lip = dev->loss_lipschitz();
            for (std::uint64_t t = 0; t < 10000; ++t) {
                // pairs inside the ball of region_radius around the start
                Vector u = random_point(d, 1000 + 7 * t, 1.0);
                Vector w = random_point(d, 2000 + 7 * t, 1.0);
                u = obj->initial_point + u * (obj->region_radius / (u.norm() + 1e-12)) *
                                             rng::to_unit(rng::mix(3000, t));
                w = obj->initial_point + w * (obj->region_radius / (w.norm() + 1e-12)) *
                                             rng::to_unit(rng::mix(4000, t));
                XiSample xi = xi_sample(xs, t, dev->device_id());
                double diff = std::fabs(dev->loss(u, xi) - dev->loss(w, xi));
                CHECK(diff <= lip * (u - w).norm() * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}

TEST_CASE("quadratic ensemble exposes its exact minimum") {
    auto obj = make_quadratic_task(7, 3, 888);
    REQUIRE(obj.known_minimum.has_value());

    // rebuild theta* from public pieces: sum_i A_i via hessian actions on the
    // basis, and sum_i A_i m_i = -grad F(0)
    const int d = obj.dim();
    Matrix a_sum(d, d);
    Vector zero = Vector::Zero(d);
    for (int j = 0; j < d; ++j) {
        Vector e = Vector::Zero(d);
        e[j] = 1.0;
        Vector col = Vector::Zero(d);
        for (const auto& dev : obj.devices) col += dev->hessian_apply(zero, e);
        a_sum.col(j) = col;
    }
    Vector rhs = -obj.gradient(zero);
    Vector theta_star = a_sum.ldlt().solve(rhs);

    CHECK(obj.gradient(theta_star).norm() < 1e-9);
    CHECK(obj.value(theta_star) == doctest::Approx(*obj.known_minimum).epsilon(1e-10));
    // it is a minimum: random probes never go below it
    for (std::uint64_t t = 0; t < 200; ++t) {
        Vector probe = theta_star + random_point(d, 500 + t, 1.0);
        CHECK(obj.value(probe) >= *obj.known_minimum - 1e-12);
    }
}

TEST_CASE("nonconvex ensemble has a stationary point at the origin") {
    auto obj = make_nonconvex_task(6, 3, 99);
    CHECK_FALSE(obj.known_minimum.has_value());
    Vector zero = Vector::Zero(6);
    CHECK(obj.gradient(zero).norm() == 0.0);
    CHECK(obj.smoothness > 0.0);
    CHECK(obj.hessian_bound > 0.0);
}

TEST_CASE("logistic shards behave like logistic loss") {
    auto obj = make_logistic_task(5, 3, 32, 777);
    Vector zero = Vector::Zero(5);
    // log(2) per sample at theta = 0 regardless of the data
    for (const auto& dev : obj.devices)
        CHECK(dev->mean_loss(zero) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(obj.value(zero) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));

    // stochastic gradient is deterministic in xi and finite
    XiStream xs{11};
    Vector theta = random_point(5, 71, 1.0);
    XiSample xi = xi_sample(xs, 2, 1);
    Vector g1 = obj.devices[0]->stochastic_gradient(theta, xi);
    Vector g2 = obj.devices[0]->stochastic_gradient(theta, xi);
    CHECK((g1.array() == g2.array()).all());
    CHECK(g1.allFinite());
}
