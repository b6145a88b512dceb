#pragma once

#include <stdexcept>
#include <string>

namespace uts {

// Error taxonomy shared by the library and the CLI exit-code contract:
// input/schema problems exit 2, numerical/degenerate problems exit 3.
enum class ErrorKind {
    Parse,        // malformed input file
    Schema,       // mismatched component sets, widths, pairings
    Bounds,       // out-of-range argument (k >= n, c > docs, ...)
    Grouping,     // cross-validation fold / group constraint violated
    Degenerate,   // input admits no defined statistic (zero rows, constant data)
    Conditioning, // linear system too ill-conditioned to trust
    Divergence,   // estimator outside its valid regime
    Estimation,   // not enough usable points for a fit
    Capability,   // requested feature beyond the configured limits
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Exit-code contract: 0 success, 2 input/schema error, 3 numerical error.
    int exit_code() const noexcept {
        switch (kind_) {
        case ErrorKind::Parse:
        case ErrorKind::Schema:
        case ErrorKind::Bounds:
        case ErrorKind::Grouping:
        case ErrorKind::Capability:
            return 2;
        default:
            return 3;
        }
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace uts
