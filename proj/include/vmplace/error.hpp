#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vmplace {

enum class Errc {
    CapacityViolation,
    UnknownVm,
    DuplicateVm,
    EmptyFlavorSet,
    InvalidFlavor,
    ZeroRegionCapacity,
    NoFeasiblePm,
    InfeasibleAssignment,
    NonEmptyCluster,
    ParseError,
    EmptyTrace,
    NotEnoughRequests,
    Io,
    Config,
    InvariantViolation,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace vmplace
