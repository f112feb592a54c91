#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace porofem {

/// Bad argument or precondition violation (maps to CLI exit code 2).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-manifold or otherwise inconsistent mesh connectivity.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Zero or negative volume simplex.
class DegenerateCell : public std::runtime_error {
public:
    DegenerateCell(const std::string& what, std::ptrdiff_t cell)
        : std::runtime_error(what), cell_(cell)
    {
    }

    /// Index of the offending cell, or -1 when the cell has no global index.
    [[nodiscard]] std::ptrdiff_t cell() const noexcept { return cell_; }

private:
    std::ptrdiff_t cell_;
};

/// Factorization failure (maps to CLI exit code 3).
class SingularSystem : public std::runtime_error {
public:
    SingularSystem(const std::string& what, std::ptrdiff_t dof = -1)
        : std::runtime_error(what), dof_(dof)
    {
    }

    [[nodiscard]] std::ptrdiff_t suspect_dof() const noexcept { return dof_; }

private:
    std::ptrdiff_t dof_;
};

/// Solver failure raised from inside a time loop; carries the step index.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, int step)
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step)
    {
    }

    [[nodiscard]] int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace porofem
