#pragma once

#include <stdexcept>
#include <string>

namespace sgn {

/// Exit-code contract shared by every command: 0 success, 1 I/O or
/// internal failure, 2 usage/validation, 3 numerical failure.
enum class ExitCode : int { Ok = 0, Internal = 1, Usage = 2, Numerical = 3 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ExitCode::Usage, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ExitCode::Internal, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ExitCode::Numerical, what) {}
};

}  // namespace sgn
