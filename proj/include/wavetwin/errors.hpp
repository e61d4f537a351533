#pragma once

#include <stdexcept>
#include <string>

namespace wavetwin {

/// Bad arguments, malformed configuration, inconsistent dimensions.
/// Maps to CLI exit code 1.
class invalid_input : public std::invalid_argument {
public:
    explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver produced non-finite values or violated a stability guard.
/// Maps to CLI exit code 2.
class numerical_instability : public std::runtime_error {
public:
    explicit numerical_instability(const std::string& what) : std::runtime_error(what) {}
};

/// The ensemble lost rank: the innovation covariance is singular and the
/// analysis update is not the trivial no-op. Maps to CLI exit code 2.
class degenerate_ensemble : public std::runtime_error {
public:
    explicit degenerate_ensemble(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wavetwin
