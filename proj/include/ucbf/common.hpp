#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ucbf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: dimension mismatches, non-positive gains, unknown ids.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A scalar argument fell outside the domain its function is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// h + eta (or s + eta) collapsed to zero, so the adaptation rate is undefined.
class SingularDenominator : public Error {
public:
    using Error::Error;
};

/// The initial state is not strictly inside the safe set.
class InfeasibleStart : public Error {
public:
    using Error::Error;
};

class UnsupportedFeature : public Error {
public:
    using Error::Error;
};

/// A set-membership update produced an empty parameter box.
class InconsistentMeasurement : public Error {
public:
    using Error::Error;
};

/// A scenario premise (admissible gain, certificate, start set) does not hold.
class PremiseViolation : public Error {
public:
    using Error::Error;
};

inline void require_size(const Vec& v, Eigen::Index n, const char* what) {
    if (v.size() != n) {
        throw ConfigError(std::string(what) + ": expected dimension " + std::to_string(n) +
                          ", got " + std::to_string(v.size()));
    }
}

/// Axis-aligned box [lower, upper] in R^k.
struct Box {
    Vec lower;
    Vec upper;

    [[nodiscard]] Eigen::Index dim() const { return lower.size(); }
    [[nodiscard]] bool contains(const Vec& v, double tol = 0.0) const {
        return ((v.array() >= lower.array() - tol) && (v.array() <= upper.array() + tol)).all();
    }
    [[nodiscard]] Vec clamp(const Vec& v) const { return v.cwiseMax(lower).cwiseMin(upper); }
    void validate(const char* what) const {
        if (lower.size() != upper.size()) {
            throw ConfigError(std::string(what) + ": lower/upper dimension mismatch");
        }
        if ((lower.array() > upper.array()).any()) {
            throw ConfigError(std::string(what) + ": lower exceeds upper");
        }
    }
};

}  // namespace ucbf
