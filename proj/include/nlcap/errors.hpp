#pragma once

#include <stdexcept>
#include <string>

namespace nlcap {

/// Input outside the domain of an operation (non-positive length, bad grid, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Formula evaluated outside its region of validity (e.g. asymptotic g below its bracket root).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Extended-precision series would need more digits than the configured cap.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested work exceeds a configured evaluation budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved_error)
        : std::runtime_error(what), achieved_error_(achieved_error) {}
    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// Root finder could not bracket a sign change.
class NoBracketError : public std::runtime_error {
public:
    NoBracketError(const std::string& what, bool degenerate)
        : std::runtime_error(what), degenerate_(degenerate) {}
    /// True when the two curves coincide to leading order (e.g. zero dispersion).
    bool degenerate() const noexcept { return degenerate_; }

private:
    bool degenerate_;
};

/// Split-step integration changed the field power more than a unitary step can.
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nlcap
