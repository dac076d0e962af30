#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gics {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigurationError : public Error { public: using Error::Error; };
class AliasingError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class ConsistencyError : public Error { public: using Error::Error; };
class DataError : public Error { public: using Error::Error; };
class ModeError : public Error { public: using Error::Error; };
class AlignmentError : public Error { public: using Error::Error; };
class StatisticsError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };

// Thrown when the objective stops decreasing or goes non-finite. The trace
// collected up to the failure is kept for inspection.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

}  // namespace gics
