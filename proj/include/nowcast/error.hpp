#pragma once

#include <stdexcept>
#include <string>

namespace nowcast {

enum class ErrorCode {
	invalid_argument = 1,
	io = 2,
	parse = 3,
	numeric = 4,
	not_found = 5,
	degenerate = 6,
};

/// Base exception for every failure raised by the library. The code maps
/// one-to-one onto the status values of the C interface.
class Error : public std::runtime_error {
public:
	Error(ErrorCode code, const std::string &message) : std::runtime_error(message), code_(code) {}

	ErrorCode code() const noexcept { return code_; }

private:
	ErrorCode code_;
};

inline Error invalid(const std::string &message) { return Error(ErrorCode::invalid_argument, message); }

} // namespace nowcast
