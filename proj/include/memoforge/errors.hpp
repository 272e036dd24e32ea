#pragma once

#include <stdexcept>
#include <string>

namespace memoforge {

// Base for all library errors. `code()` is a stable machine-readable tag
// used by the CLI to pick exit codes and by tests to assert error kinds.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

inline Error make_error(const std::string& code, const std::string& msg) {
    return Error(code, code + ": " + msg);
}

} // namespace memoforge
