#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sensorseq {

/// Failure classes; the CLI maps them to exit codes 1 / 2 / 3.
enum class ErrorClass { usage = 1, data = 2, divergence = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::usage, "config: " + what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorClass::data, "io: " + what) {}
};

class SchemaViolation : public Error {
public:
    SchemaViolation(std::size_t record, const std::string& reason)
        : Error(ErrorClass::data, "schema: record " + std::to_string(record) + ": " + reason),
          record_(record), reason_(reason) {}
    std::size_t record() const noexcept { return record_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t record_;
    std::string reason_;
};

class LabelAnchorMissing : public Error {
public:
    explicit LabelAnchorMissing(std::size_t anchor)
        : Error(ErrorClass::data, "label anchor " + std::to_string(anchor) + " not in stream"),
          anchor_(anchor) {}
    std::size_t anchor() const noexcept { return anchor_; }

private:
    std::size_t anchor_;
};

class MissingTableEntry : public Error {
public:
    explicit MissingTableEntry(const std::string& what)
        : Error(ErrorClass::data, "weights: no table entry for " + what) {}
};

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& what) : Error(ErrorClass::data, "shape: " + what) {}
};

class NoValidGroups : public Error {
public:
    NoValidGroups() : Error(ErrorClass::data, "eval: no (user, category) group has both classes") {}
};

class DivergenceDetected : public Error {
public:
    explicit DivergenceDetected(const std::string& what)
        : Error(ErrorClass::divergence, "divergence: " + what) {}
};

}  // namespace sensorseq
