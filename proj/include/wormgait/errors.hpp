#ifndef WORMGAIT_ERRORS_HPP
#define WORMGAIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wormgait {

// Malformed input files (CSV headers, parameter-file syntax). Treated as a
// usage problem by the CLI.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Everything raised by the models themselves.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public ModelError {
public:
    using ModelError::ModelError;
};

// Time step too coarse for the dynamics being integrated.
class ResolutionError : public ModelError {
public:
    using ModelError::ModelError;
};

// Anchor switching failed to reach a fixpoint.
class LivelockError : public ModelError {
public:
    using ModelError::ModelError;
};

// Non-uniform or mismatched time grids.
class GridError : public ModelError {
public:
    using ModelError::ModelError;
};

// Trace too short for the requested evaluation window.
class WindowError : public ModelError {
public:
    using ModelError::ModelError;
};

// Data that cannot support the requested computation (too few samples,
// unidentifiable logs, empty fronts).
class DataError : public ModelError {
public:
    using ModelError::ModelError;
};

} // namespace wormgait

#endif
