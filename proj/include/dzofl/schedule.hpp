#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dzofl/errors.hpp"

namespace dzofl {

// Power-law decay schedules for the model step size alpha_k and the
// perturbation radius gamma_k:
//   alpha_k = alpha0 * (1+k)^-upsilon1
//   gamma_k = gamma0 * (1+k)^-upsilon2
struct StepSchedule {
    double alpha0 = 0.1;
    double gamma0 = 0.5;
    double upsilon1 = 0.26;
    double upsilon2 = 0.26;
};

inline double alpha(const StepSchedule& s, std::uint64_t k) {
    return s.alpha0 * std::pow(1.0 + static_cast<double>(k), -s.upsilon1);
}

inline double gamma(const StepSchedule& s, std::uint64_t k) {
    return s.gamma0 * std::pow(1.0 + static_cast<double>(k), -s.upsilon2);
}

struct ExponentVerdict {
    bool valid = true;
    std::vector<std::string> violated; // names of failed constraints
};

// The convergence analysis admits exponent pairs satisfying all of:
//   0 < upsilon1+upsilon2 <= 1
//   upsilon1+3*upsilon2 > 1
//   upsilon1+upsilon2 > 0.5
// Boundary cases: sum == 1 is valid, upsilon1+3*upsilon2 == 1 is not.
inline ExponentVerdict validate_exponents(double u1, double u2) {
    ExponentVerdict v;
    double s = u1 + u2;
    if (!(s > 0.0 && s <= 1.0)) v.violated.push_back("upsilon1+upsilon2 in (0,1]");
    if (!(u1 + 3.0 * u2 > 1.0)) v.violated.push_back("upsilon1+3*upsilon2 > 1");
    if (!(s > 0.5)) v.violated.push_back("upsilon1+upsilon2 > 0.5");
    v.valid = v.violated.empty();
    return v;
}

// Full field check; throws ConfigError naming every violated constraint.
inline void validate(const StepSchedule& s) {
    std::vector<std::string> bad;
    if (!(s.alpha0 > 0.0)) bad.push_back("alpha0 > 0");
    if (!(s.gamma0 > 0.0)) bad.push_back("gamma0 > 0");
    if (!(s.upsilon1 >= 0.0)) bad.push_back("upsilon1 >= 0");
    if (!(s.upsilon2 >= 0.0)) bad.push_back("upsilon2 >= 0");
    auto verdict = validate_exponents(s.upsilon1, s.upsilon2);
    bad.insert(bad.end(), verdict.violated.begin(), verdict.violated.end());
    if (!bad.empty()) {
        std::string msg = "invalid step schedule, violated:";
        for (const auto& b : bad) msg += " [" + b + "]";
        throw ConfigError(msg);
    }
}

} // namespace dzofl
