#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace limitlyap {

// All library failures carry a stable "<module>/<kind>" code so the CLI can
// surface them verbatim; what() is the bare message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace limitlyap
