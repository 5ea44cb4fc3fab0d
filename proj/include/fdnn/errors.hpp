#pragma once

#include <stdexcept>
#include <string>

namespace fdnn {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text; the message names the offending line.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };

/// Gram matrix is not positive definite (redundant basis).
class RankDeficiencyError : public Error { using Error::Error; };
class UnsupportedOrderError : public Error { using Error::Error; };

/// Least-squares design does not identify every coefficient.
class UnidentifiableError : public Error { using Error::Error; };
class DegenerateLooError : public Error { using Error::Error; };
class SelectionError : public Error { using Error::Error; };

class ConstantFunctionError : public Error { using Error::Error; };
class DegenerateComponentError : public Error { using Error::Error; };
class TrainingError : public Error { using Error::Error; };
class ImputationError : public Error { using Error::Error; };
class ScalingError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace fdnn
