#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dzofl/types.hpp"

namespace dzofl {

// Opaque per-(device, round) sample of the data/noise randomness. The same
// xi is passed to both loss queries of a round, which is what makes the
// two-point difference estimator work on noisy losses. Evaluation is a pure
// function of (theta, xi): identical inputs give bit-identical losses.
struct XiSample {
    std::uint64_t key = 0;
};

struct XiStream {
    std::uint64_t seed = 0;
};

XiSample xi_sample(const XiStream& s, std::uint64_t round, int device_id);

// One device's local objective F_i with its stochastic query form
// f_i(theta, xi), E_xi[f_i(theta, xi)] = F_i(theta). Analytic gradient and
// Hessian access exist for validation only; the training loop never touches
// them.
class DeviceTask {
public:
    DeviceTask(int device_id, int dim) : id_(device_id), dim_(dim) {}
    virtual ~DeviceTask() = default;

    int device_id() const { return id_; }
    int dim() const { return dim_; }

    virtual double loss(const Vector& theta, const XiSample& xi) const = 0;
    virtual double mean_loss(const Vector& theta) const = 0;
    virtual Vector gradient(const Vector& theta) const = 0;
    virtual Vector hessian_apply(const Vector& theta, const Vector& v) const = 0;

    // Stochastic gradient on the xi-selected sample; used by the first-order
    // reference method. Defaults to the exact gradient, which is correct for
    // tasks whose xi-noise is additive in the loss value.
    virtual Vector stochastic_gradient(const Vector& theta, const XiSample& /*xi*/) const {
        return gradient(theta);
    }

    // Certified constants, valid on the objective's test region:
    // loss_lipschitz bounds |f_i(a,xi)-f_i(b,xi)| / ||a-b|| for every xi,
    // hessian_norm_bound bounds the spectral norm of the Hessian of F_i.
    virtual double loss_lipschitz() const = 0;
    virtual double hessian_norm_bound() const = 0;

private:
    int id_;
    int dim_;
};

// F(theta) = sum_i F_i(theta) over all devices, plus the certified constants
// the validators need. Constants are computed at construction from the
// generated problem data (eigenvalues, data norms), never estimated.
struct GlobalObjective {
    std::string kind;
    std::vector<std::unique_ptr<DeviceTask>> devices;
    Vector initial_point;
    double region_radius = 10.0;   // certified constants hold on this ball
    double smoothness = 0.0;       // L, gradient Lipschitz constant of F
    double hessian_bound = 0.0;    // alpha1 = max_i ||hess F_i|| bound
    double loss_lipschitz_sq = 0.0; // max_i E[L_i(xi)^2] upper bound
    std::optional<double> known_minimum; // F(theta*) when analytically available

    int dim() const { return initial_point.size() ? static_cast<int>(initial_point.size()) : 0; }
    int num_devices() const { return static_cast<int>(devices.size()); }
    double value(const Vector& theta) const;
    Vector gradient(const Vector& theta) const;
};

// ||grad F(theta)||^2 with a dimension check (ConfigError on mismatch).
double true_gradient_norm_sq(const GlobalObjective& obj, const Vector& theta);

// Random strongly convex quadratic ensemble:
//   F_i(theta) = 0.5 (theta - m_i)' A_i (theta - m_i),
// A_i symmetric positive definite with known spectrum. Two-point estimation
// on this family has exactly zero bias, and F(theta*) is computed in closed
// form, so it anchors the unbiasedness and convergence-bound tests.
GlobalObjective make_quadratic_task(int dim, int num_devices, std::uint64_t seed);

// Nonconvex ensemble with bounded third derivatives:
//   F_i(theta) = 0.5 theta' A_i theta + c * sum_j cos(theta_j).
GlobalObjective make_nonconvex_task(int dim, int num_devices, std::uint64_t seed);

// Binary logistic regression on synthetic two-class Gaussian blobs, one
// i.i.d. shard per device; xi draws the mini-batch.
GlobalObjective make_logistic_task(int dim, int num_devices, int samples_per_device,
                                   std::uint64_t seed);

} // namespace dzofl
