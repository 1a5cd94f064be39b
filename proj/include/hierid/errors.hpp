#pragma once

#include <stdexcept>
#include <string>

namespace hierid {

// Error categories map onto CLI exit codes: Input/Schema -> 2, Numerical -> 3.
enum class Errc {
    Input,      // bad arguments / preconditions
    Schema,     // config or file format violation
    Numerical,  // non-convergence, NaN, degenerate computation
    Io          // filesystem problems
};

class Error : public std::runtime_error {
public:
    Error(Errc kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Errc kind() const noexcept { return kind_; }

private:
    Errc kind_;
};

[[noreturn]] inline void throw_input(const std::string& msg) { throw Error(Errc::Input, msg); }
[[noreturn]] inline void throw_schema(const std::string& msg) { throw Error(Errc::Schema, msg); }
[[noreturn]] inline void throw_numerical(const std::string& msg) { throw Error(Errc::Numerical, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(Errc::Io, msg); }

}  // namespace hierid
