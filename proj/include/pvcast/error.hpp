#pragma once

#include <stdexcept>
#include <string>

namespace pvcast {

// Base for every error raised by the library. Row-level problems during
// ingestion are tallied in an IngestReport instead of thrown.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Header missing, unknown column, or required column absent.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Caller violated a documented precondition (e.g. unsorted input).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Dataset has no usable rows.
class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class UnknownFeatureError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, const std::string& what)
        : Error(what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

// Model feature_order does not match the matrix columns.
class ColumnMismatchError : public Error {
public:
    using Error::Error;
};

class ArtifactError : public Error {
public:
    using Error::Error;
};

class CorruptArtifactError : public ArtifactError {
public:
    using ArtifactError::ArtifactError;
};

class VersionError : public ArtifactError {
public:
    using ArtifactError::ArtifactError;
};

class ChecksumError : public ArtifactError {
public:
    using ArtifactError::ArtifactError;
};

// Predicted and actual series share no timestamps.
class NoOverlapError : public Error {
public:
    using Error::Error;
};

}  // namespace pvcast
