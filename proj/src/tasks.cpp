#include "dzofl/tasks.hpp"

#include <cmath>
#include <string>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"

namespace dzofl {

namespace {

// Sequential counter draw over the stateless mixer; used only while
// generating problem data at construction time.
struct CounterRng {
    std::uint64_t seed;
    std::uint64_t ctr = 0;
    std::uint64_t next() { return rng::mix(seed, ctr++); }
    double unit() { return rng::to_unit(next()); }
    double gaussian() {
        std::uint64_t a = next(), b = next();
        return rng::to_gaussian(a, b);
    }
};

Matrix random_orthogonal(int d, CounterRng& r) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = r.gaussian();
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ();
}

// A = R diag(lam) R' with lam_j uniform in [lo, hi]; returns the exact
// largest eigenvalue alongside.
std::pair<Matrix, double> random_spd(int d, double lo, double hi, CounterRng& r) {
    Matrix rot = random_orthogonal(d, r);
    Vector lam(d);
    double lmax = 0.0;
    for (int j = 0; j < d; ++j) {
        lam[j] = lo + (hi - lo) * r.unit();
        lmax = std::max(lmax, lam[j]);
    }
    Matrix a = rot * lam.asDiagonal() * rot.transpose();
    // symmetrize away the last-bit asymmetry from the triple product
    a = 0.5 * (a + a.transpose()).eval();
    return {a, lmax};
}

// Zero-mean additive loss noise, uniform on [-scale, scale], expanded from
// the opaque xi key.
double additive_noise(const XiSample& xi, double scale) {
    double u = rng::to_unit(rng::splitmix64(xi.key ^ 0x5bd1e995c3ULL));
    return scale * (2.0 * u - 1.0);
}

constexpr double kNoiseScale = 0.05;

class QuadraticDevice final : public DeviceTask {
public:
    QuadraticDevice(int id, Matrix a, Vector m, double lmax)
        : DeviceTask(id, static_cast<int>(m.size())),
          a_(std::move(a)), m_(std::move(m)), lmax_(lmax) {}

    double loss(const Vector& theta, const XiSample& xi) const override {
        return mean_loss(theta) + additive_noise(xi, kNoiseScale);
    }
    double mean_loss(const Vector& theta) const override {
        Vector r = theta - m_;
        return 0.5 * r.dot(a_ * r);
    }
    Vector gradient(const Vector& theta) const override { return a_ * (theta - m_); }
    Vector hessian_apply(const Vector&, const Vector& v) const override { return a_ * v; }

    double loss_lipschitz() const override { return lip_; }
    double hessian_norm_bound() const override { return lmax_; }

    void set_region(const Vector& anchor, double radius) {
        // sup over the ball of ||A (theta - m)|| <= lmax * (radius + |anchor - m|)
        lip_ = lmax_ * (radius + (anchor - m_).norm());
    }
    const Matrix& quadratic_form() const { return a_; }
    const Vector& center() const { return m_; }

private:
    Matrix a_;
    Vector m_;
    double lmax_;
    double lip_ = 0.0;
};

class CosineQuadDevice final : public DeviceTask {
public:
    CosineQuadDevice(int id, Matrix a, double lmax, double c)
        : DeviceTask(id, static_cast<int>(a.rows())),
          a_(std::move(a)), lmax_(lmax), c_(c) {}

    double loss(const Vector& theta, const XiSample& xi) const override {
        return mean_loss(theta) + additive_noise(xi, kNoiseScale);
    }
    double mean_loss(const Vector& theta) const override {
        return 0.5 * theta.dot(a_ * theta) + c_ * theta.array().cos().sum();
    }
    Vector gradient(const Vector& theta) const override {
        return a_ * theta - c_ * theta.array().sin().matrix();
    }
    Vector hessian_apply(const Vector& theta, const Vector& v) const override {
        return a_ * v - c_ * (theta.array().cos() * v.array()).matrix();
    }

    double loss_lipschitz() const override { return lip_; }
    double hessian_norm_bound() const override { return lmax_ + c_; }

    void set_region(const Vector& anchor, double radius) {
        double sup_theta = anchor.norm() + radius;
        lip_ = lmax_ * sup_theta + c_ * std::sqrt(static_cast<double>(dim()));
    }
    const Matrix& quadratic_form() const { return a_; }
    double cosine_weight() const { return c_; }

private:
    Matrix a_;
    double lmax_;
    double c_;
    double lip_ = 0.0;
};

class LogisticDevice final : public DeviceTask {
public:
    LogisticDevice(int id, Matrix x, std::vector<double> y, int batch)
        : DeviceTask(id, static_cast<int>(x.cols())),
          x_(std::move(x)), y_(std::move(y)), batch_(batch) {
        double max_sq = 0.0, sum_sq = 0.0;
        for (int s = 0; s < x_.rows(); ++s) {
            double n2 = x_.row(s).squaredNorm();
            max_sq = std::max(max_sq, n2);
            sum_sq += n2;
        }
        lip_ = std::sqrt(max_sq);
        hess_bound_ = 0.25 * sum_sq / static_cast<double>(x_.rows());
    }

    // numerically stable log(1 + exp(-t))
    static double softplus_neg(double t) {
        return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
    }

    double loss(const Vector& theta, const XiSample& xi) const override {
        double acc = 0.0;
        for (int b = 0; b < batch_; ++b) {
            int s = pick(xi, b);
            acc += softplus_neg(y_[s] * x_.row(s).dot(theta));
        }
        return acc / static_cast<double>(batch_);
    }
    double mean_loss(const Vector& theta) const override {
        double acc = 0.0;
        for (int s = 0; s < x_.rows(); ++s)
            acc += softplus_neg(y_[s] * x_.row(s).dot(theta));
        return acc / static_cast<double>(x_.rows());
    }
    Vector gradient(const Vector& theta) const override {
        Vector g = Vector::Zero(dim());
        for (int s = 0; s < x_.rows(); ++s) {
            double t = y_[s] * x_.row(s).dot(theta);
            g -= (y_[s] / (1.0 + std::exp(t))) * x_.row(s).transpose();
        }
        return g / static_cast<double>(x_.rows());
    }
    Vector stochastic_gradient(const Vector& theta, const XiSample& xi) const override {
        Vector g = Vector::Zero(dim());
        for (int b = 0; b < batch_; ++b) {
            int s = pick(xi, b);
            double t = y_[s] * x_.row(s).dot(theta);
            g -= (y_[s] / (1.0 + std::exp(t))) * x_.row(s).transpose();
        }
        return g / static_cast<double>(batch_);
    }
    Vector hessian_apply(const Vector& theta, const Vector& v) const override {
        Vector h = Vector::Zero(dim());
        for (int s = 0; s < x_.rows(); ++s) {
            double t = y_[s] * x_.row(s).dot(theta);
            double sig = 1.0 / (1.0 + std::exp(-t));
            h += (sig * (1.0 - sig) * x_.row(s).dot(v)) * x_.row(s).transpose();
        }
        return h / static_cast<double>(x_.rows());
    }

    double loss_lipschitz() const override { return lip_; }
    double hessian_norm_bound() const override { return hess_bound_; }

private:
    // batch index b of the xi-selected mini-batch, drawn with replacement so
    // that E_xi[f_i] is exactly the full-shard mean
    int pick(const XiSample& xi, int b) const {
        std::uint64_t h = rng::mix(xi.key, static_cast<std::uint64_t>(b));
        return static_cast<int>(h % static_cast<std::uint64_t>(x_.rows()));
    }

    Matrix x_;
    std::vector<double> y_;
    int batch_;
    double lip_ = 0.0;
    double hess_bound_ = 0.0;
};

void check_dims(int dim, int num_devices) {
    if (dim < 1) throw ConfigError("task dim must be >= 1, got " + std::to_string(dim));
    if (num_devices < 1)
        throw ConfigError("task num_devices must be >= 1, got " + std::to_string(num_devices));
}

} // namespace

XiSample xi_sample(const XiStream& s, std::uint64_t round, int device_id) {
    return XiSample{rng::mix(s.seed, round, static_cast<std::uint64_t>(device_id))};
}

double GlobalObjective::value(const Vector& theta) const {
    double acc = 0.0;
    for (const auto& d : devices) acc += d->mean_loss(theta);
    return acc;
}

Vector GlobalObjective::gradient(const Vector& theta) const {
    Vector g = Vector::Zero(theta.size());
    for (const auto& d : devices) g += d->gradient(theta);
    return g;
}

double true_gradient_norm_sq(const GlobalObjective& obj, const Vector& theta) {
    if (theta.size() != obj.initial_point.size())
        throw ConfigError("true_gradient_norm_sq: theta has dim " +
                          std::to_string(theta.size()) + ", task expects " +
                          std::to_string(obj.initial_point.size()));
    return obj.gradient(theta).squaredNorm();
}

GlobalObjective make_quadratic_task(int dim, int num_devices, std::uint64_t seed) {
    check_dims(dim, num_devices);
    CounterRng r{rng::mix(seed, 0x71adULL)};

    GlobalObjective obj;
    obj.kind = "quadratic";
    obj.initial_point = Vector(dim);
    for (int j = 0; j < dim; ++j) obj.initial_point[j] = r.gaussian();

    Matrix a_sum = Matrix::Zero(dim, dim);
    Vector rhs = Vector::Zero(dim);
    double alpha1 = 0.0;
    std::vector<QuadraticDevice*> raw;
    for (int i = 1; i <= num_devices; ++i) {
        auto [a, lmax] = random_spd(dim, 0.5, 1.0, r);
        Vector m(dim);
        for (int j = 0; j < dim; ++j) m[j] = 1.5 * r.gaussian();
        a_sum += a;
        rhs += a * m;
        alpha1 = std::max(alpha1, lmax);
        auto dev = std::make_unique<QuadraticDevice>(i, std::move(a), std::move(m), lmax);
        raw.push_back(dev.get());
        obj.devices.push_back(std::move(dev));
    }

    double lip_sq = 0.0;
    for (auto* d : raw) {
        d->set_region(obj.initial_point, obj.region_radius);
        lip_sq = std::max(lip_sq, d->loss_lipschitz() * d->loss_lipschitz());
    }
    obj.hessian_bound = alpha1;
    obj.loss_lipschitz_sq = lip_sq;

    Eigen::SelfAdjointEigenSolver<Matrix> es(a_sum);
    obj.smoothness = es.eigenvalues().maxCoeff();

    // minimizer of sum_i 0.5 (theta-m_i)' A_i (theta-m_i) solves
    // (sum A_i) theta = sum A_i m_i; the sum is positive definite
    Vector theta_star = a_sum.ldlt().solve(rhs);
    obj.known_minimum = obj.value(theta_star);
    return obj;
}

GlobalObjective make_nonconvex_task(int dim, int num_devices, std::uint64_t seed) {
    check_dims(dim, num_devices);
    CounterRng r{rng::mix(seed, 0xc05eULL)};
    const double c = 0.5;

    GlobalObjective obj;
    obj.kind = "nonconvex";
    obj.initial_point = Vector(dim);
    for (int j = 0; j < dim; ++j) obj.initial_point[j] = 2.0 + 0.5 * r.gaussian();

    Matrix a_sum = Matrix::Zero(dim, dim);
    double alpha1 = 0.0;
    std::vector<CosineQuadDevice*> raw;
    for (int i = 1; i <= num_devices; ++i) {
        auto [a, lmax] = random_spd(dim, 0.4, 0.8, r);
        a_sum += a;
        auto dev = std::make_unique<CosineQuadDevice>(i, std::move(a), lmax, c);
        alpha1 = std::max(alpha1, dev->hessian_norm_bound());
        raw.push_back(dev.get());
        obj.devices.push_back(std::move(dev));
    }

    double lip_sq = 0.0;
    for (auto* d : raw) {
        d->set_region(obj.initial_point, obj.region_radius);
        lip_sq = std::max(lip_sq, d->loss_lipschitz() * d->loss_lipschitz());
    }
    obj.hessian_bound = alpha1;
    obj.loss_lipschitz_sq = lip_sq;

    Eigen::SelfAdjointEigenSolver<Matrix> es(a_sum);
    obj.smoothness = es.eigenvalues().maxCoeff() + c * num_devices;
    // no closed-form minimum for the cosine-perturbed ensemble
    obj.known_minimum = std::nullopt;
    return obj;
}

GlobalObjective make_logistic_task(int dim, int num_devices, int samples_per_device,
                                   std::uint64_t seed) {
    check_dims(dim, num_devices);
    if (samples_per_device < 1)
        throw ConfigError("logistic task needs samples_per_device >= 1, got " +
                          std::to_string(samples_per_device));
    CounterRng r{rng::mix(seed, 0x106eULL)};

    // common class-mean direction, shared across devices (shards are i.i.d.)
    Vector mu(dim);
    for (int j = 0; j < dim; ++j) mu[j] = r.gaussian();
    mu *= 1.5 / std::max(mu.norm(), 1e-12);

    GlobalObjective obj;
    obj.kind = "logistic";
    obj.initial_point = Vector::Zero(dim);

    double alpha1_sum = 0.0, alpha1_max = 0.0, lip_sq = 0.0;
    const int batch = std::min(8, samples_per_device);
    for (int i = 1; i <= num_devices; ++i) {
        Matrix x(samples_per_device, dim);
        std::vector<double> y(samples_per_device);
        for (int s = 0; s < samples_per_device; ++s) {
            double label = (s % 2 == 0) ? 1.0 : -1.0;
            y[s] = label;
            for (int j = 0; j < dim; ++j) x(s, j) = label * mu[j] + r.gaussian();
        }
        auto dev = std::make_unique<LogisticDevice>(i, std::move(x), std::move(y), batch);
        alpha1_sum += dev->hessian_norm_bound();
        alpha1_max = std::max(alpha1_max, dev->hessian_norm_bound());
        lip_sq = std::max(lip_sq, dev->loss_lipschitz() * dev->loss_lipschitz());
        obj.devices.push_back(std::move(dev));
    }
    obj.hessian_bound = alpha1_max;
    obj.loss_lipschitz_sq = lip_sq;
    obj.smoothness = alpha1_sum;
    obj.known_minimum = std::nullopt;
    return obj;
}

} // namespace dzofl
