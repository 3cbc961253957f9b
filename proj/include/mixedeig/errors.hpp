#pragma once

#include <stdexcept>
#include <string>

namespace mixedeig {

// Base class for all library errors. Subclasses exist so callers can map
// failure families to distinct process exit codes.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lattice/mask/polarizer misuse: incompatible polarizer, reflection leaving
// the box, empty domains, undersized lattices.
class geometry_error : public error {
public:
    using error::error;
};

// Rearrangement preconditions: negative input values, box not symmetric
// under a requested reflection.
class rearrange_error : public error {
public:
    using error::error;
};

// Energy preconditions: invalid operator parameters, zero-norm Rayleigh
// quotient, support touching the box boundary while the exterior tail is on.
class energy_error : public error {
public:
    using error::error;
};

// Solver failure that callers must not ignore (non-convergence surfaces as a
// flag first; this is thrown when a caller requires a converged result).
class solver_error : public error {
public:
    using error::error;
};

// Config file problems: unknown key, missing key, type mismatch.
class config_error : public error {
public:
    using error::error;
};

// File import/export problems.
class io_error : public error {
public:
    using error::error;
};

} // namespace mixedeig
