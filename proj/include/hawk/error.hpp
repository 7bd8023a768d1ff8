#pragma once

#include <stdexcept>
#include <string>

namespace hawk {

// Base for every error the engine raises. `code()` is the stable name used in
// HTTP payloads and CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Input validation failures map to CLI exit code 2 and HTTP 400.
class ValidationError : public Error {
public:
    using Error::Error;
};

class SchemaError : public ValidationError {
public:
    explicit SchemaError(const std::string& what) : ValidationError("SchemaError", what) {}
};

class ConsistencyError : public ValidationError {
public:
    explicit ConsistencyError(const std::string& what) : ValidationError("ConsistencyError", what) {}
};

class ConfigError : public ValidationError {
public:
    explicit ConfigError(const std::string& what) : ValidationError("ConfigError", what) {}
};

class UnknownPlayer : public Error {
public:
    explicit UnknownPlayer(const std::string& id) : Error("UnknownPlayer", "unknown player " + id) {}
};

class DegenerateClass : public Error {
public:
    explicit DegenerateClass(const std::string& what) : Error("DegenerateClass", what) {}
};

class UntrainedModel : public Error {
public:
    explicit UntrainedModel(const std::string& what) : Error("UntrainedModel", what) {}
};

class EmptySequence : public Error {
public:
    EmptySequence() : Error("EmptySequence", "sequence has no steps") {}
};

class NonFiniteLoss : public Error {
public:
    explicit NonFiniteLoss(int epoch)
        : Error("NonFiniteLoss", "non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class SingularCovariance : public Error {
public:
    SingularCovariance() : Error("SingularCovariance", "class covariance is not positive definite") {}
};

class MissingEmbedding : public Error {
public:
    explicit MissingEmbedding(const std::string& what) : Error("MissingEmbedding", what) {}
};

class SimplexViolation : public ValidationError {
public:
    explicit SimplexViolation(const std::string& what) : ValidationError("SimplexViolation", what) {}
};

class InfeasibleConstraint : public Error {
public:
    explicit InfeasibleConstraint(const std::string& what) : Error("InfeasibleConstraint", what) {}
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& what) : Error("InsufficientData", what) {}
};

} // namespace hawk
