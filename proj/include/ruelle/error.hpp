#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ruelle {

/// Library error with a stable machine-readable reason code. The CLI maps
/// these to {"error": code, ...} on stderr and exit status 1.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* malformed_map = "malformed-map";
inline constexpr const char* root_failure = "root-failure";
inline constexpr const char* non_simple_critical = "non-simple-critical";
inline constexpr const char* normalization = "normalization";
inline constexpr const char* not_normalized = "not-normalized";
inline constexpr const char* budget = "budget";
inline constexpr const char* length_mismatch = "length-mismatch";
inline constexpr const char* closure_violation = "non-invariant-span";
inline constexpr const char* quadrature = "quadrature";
inline constexpr const char* bad_input = "bad-input";
inline constexpr const char* unsupported = "unsupported";
inline constexpr const char* pole = "pole";
}  // namespace errc

}  // namespace ruelle
