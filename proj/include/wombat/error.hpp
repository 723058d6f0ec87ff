#pragma once

#include <stdexcept>
#include <string>

namespace wombat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed identifier or query string.
class GrammarError : public Error {
public:
    using Error::Error;
};

/// Duplicate registration, unknown entry, manifest corruption.
class CatalogError : public Error {
public:
    using Error::Error;
};

/// Import and lookup failures on a WEC store.
class StoreError : public Error {
public:
    using Error::Error;
};

/// A preprocessing stage failed (external process, bad descriptor).
class PipelineError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments to an analysis routine.
class AnalysisError : public Error {
public:
    using Error::Error;
};

} // namespace wombat
