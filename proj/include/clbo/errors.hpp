#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clbo {

/// Raised when a caller breaks a documented precondition (dimension mismatch,
/// weights that do not sum to one, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A covariance matrix could not be factorized even after the full jitter
/// escalation. Carries the hyperparameters that were being evaluated.
class IllConditionedModel : public std::runtime_error {
public:
    IllConditionedModel(const std::string& what, std::vector<double> last_parameters = {})
        : std::runtime_error(what), last_parameters_(std::move(last_parameters)) {}

    [[nodiscard]] const std::vector<double>& last_parameters() const noexcept { return last_parameters_; }

private:
    std::vector<double> last_parameters_;
};

/// Invalid experiment configuration. `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)), message_(message) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

inline void require(bool condition, const char* message) {
    if (!condition) {
        throw ContractViolation(message);
    }
}

}  // namespace clbo
