#pragma once

#include <stdexcept>
#include <string>

namespace neckforge {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failures map to CLI exit status 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Configuration problems map to CLI exit status 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

#define NECKFORGE_NUMERICAL_ERROR(Name)                  \
    class Name : public NumericalError {                 \
    public:                                              \
        explicit Name(const std::string& what)           \
            : NumericalError(#Name ": " + what) {}       \
    }

NECKFORGE_NUMERICAL_ERROR(PoleError);
NECKFORGE_NUMERICAL_ERROR(DegenerateSpec);
NECKFORGE_NUMERICAL_ERROR(ContourThroughRoot);
NECKFORGE_NUMERICAL_ERROR(NonConvergence);
NECKFORGE_NUMERICAL_ERROR(ResonanceError);
NECKFORGE_NUMERICAL_ERROR(TailMismatch);
NECKFORGE_NUMERICAL_ERROR(WindowTooShort);
NECKFORGE_NUMERICAL_ERROR(SingularBVP);
NECKFORGE_NUMERICAL_ERROR(ResolutionTooCoarse);
NECKFORGE_NUMERICAL_ERROR(NonPositiveConformalFactor);
NECKFORGE_NUMERICAL_ERROR(Diverged);

#undef NECKFORGE_NUMERICAL_ERROR

class ParseError : public ConfigError {
public:
    ParseError(const std::string& what, int line)
        : ConfigError("ParseError (line " + std::to_string(line) + "): " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// The chart and neck regions intersect.
class ConfigOverlap : public ConfigError {
public:
    explicit ConfigOverlap(const std::string& what) : ConfigError("ConfigOverlap: " + what) {}
};

class ValidationError : public ConfigError {
public:
    ValidationError(const std::string& key, const std::string& what)
        : ConfigError("ValidationError [" + key + "]: " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace neckforge
