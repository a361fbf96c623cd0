#pragma once

#include <stdexcept>
#include <string>

namespace pllt {

/// Base class for all failures raised by the simulation and analysis layers.
class PlltError : public std::runtime_error {
public:
    explicit PlltError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The plant state became non-finite or exceeded the displacement guard.
class IntegrationDivergence : public PlltError {
public:
    IntegrationDivergence(const std::string& msg, double t_fail)
        : PlltError(msg + " (t=" + std::to_string(t_fail) + " s)"), t(t_fail) {}
    double t;
};

/// An adaptive-filter update produced a non-finite synthesis error or weight.
class FilterDivergence : public PlltError {
public:
    FilterDivergence(const std::string& msg, double t_fail)
        : PlltError(msg + " (t=" + std::to_string(t_fail) + " s)"), t(t_fail) {}
    double t;
};

/// The closed loop collapsed (instantaneous frequency hit the hard floor).
class LoopFailure : public PlltError {
public:
    LoopFailure(const std::string& msg, double t_fail)
        : PlltError(msg + " (t=" + std::to_string(t_fail) + " s)"), t(t_fail) {}
    double t;
};

/// A harmonic amplitude stayed degenerate, so its phase cannot be defined.
class UndefinedPhase : public PlltError {
public:
    explicit UndefinedPhase(const std::string& msg) : PlltError(msg) {}
    UndefinedPhase(const std::string& msg, double t_fail)
        : PlltError(msg + " (t=" + std::to_string(t_fail) + " s)"), t(t_fail) {}
    double t = 0.0;
};

/// Newton correction of a harmonic-balance point did not converge.
class CorrectorFailure : public PlltError {
public:
    CorrectorFailure(const std::string& msg, double residual_norm, int iterations)
        : PlltError(msg + " (residual " + std::to_string(residual_norm) + " after " +
                    std::to_string(iterations) + " iterations)"),
          residual(residual_norm), iters(iterations) {}
    double residual;
    int iters;
};

/// Two result sets do not overlap enough to be compared.
class ComparisonImpossible : public PlltError {
public:
    explicit ComparisonImpossible(const std::string& msg) : PlltError(msg) {}
};

/// Configuration file could not be parsed or failed validation.
class ConfigError : public PlltError {
public:
    explicit ConfigError(const std::string& msg) : PlltError(msg), line(0), column(0) {}
    ConfigError(const std::string& msg, int line_, int column_)
        : PlltError(msg + " (line " + std::to_string(line_) + ", column " +
                    std::to_string(column_) + ")"),
          line(line_), column(column_) {}
    int line;
    int column;
};

}  // namespace pllt
