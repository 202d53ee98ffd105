// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_ERRORS_HPP
#define CLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace clab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value (bad field in a config file or struct).
struct ConfigError : Error {
    using Error::Error;
};

/// API misuse (backward without a graph, step without grads, ...).
struct UsageError : Error {
    using Error::Error;
};

/// A documented pre/post-condition was violated by the caller's data.
struct ContractViolation : Error {
    using Error::Error;
};

/// NaN/Inf or other numeric breakdown during computation.
struct NumericError : Error {
    using Error::Error;
};

/// Malformed external input (CSV rows, image files, checkpoint bytes).
struct IngestError : Error {
    using Error::Error;
};

template <class E>
inline void require(bool cond, const std::string& message)
{
    if (!cond) throw E(message);
}

} // namespace clab

#endif // CLAB_ERRORS_HPP
