#pragma once

#include <stdexcept>
#include <string>

namespace evofis {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// CSV header or config schema does not match what was declared.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Bad cell content or ordering inside an otherwise well-formed file.
class IngestError : public Error {
public:
    using Error::Error;
};

/// Series too short for the requested window.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Train/test partition would be empty.
class SplitError : public Error {
public:
    using Error::Error;
};

/// Constant channel: min == max, normalization undefined.
class DegenerateChannelError : public Error {
public:
    using Error::Error;
};

/// Operation on a model with no rules, or invalid rule index.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix sizes inconsistent with the model dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Rank/score matrix malformed or statistic unsupported for the shape.
class StatsError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace evofis
