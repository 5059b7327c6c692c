#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qwalk {

// Base of all library errors; `kind` is a stable machine-readable tag that
// the CLI forwards into its error records.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define QWALK_DEFINE_ERROR(NAME)                      \
    class NAME : public Error {                       \
    public:                                           \
        explicit NAME(const std::string& message)     \
            : Error(#NAME, message) {}                \
    }

QWALK_DEFINE_ERROR(NotUnitary);
QWALK_DEFINE_ERROR(SingularOnSubspace);
QWALK_DEFINE_ERROR(DimensionMismatch);
QWALK_DEFINE_ERROR(DomainError);
QWALK_DEFINE_ERROR(WindowOverflow);
QWALK_DEFINE_ERROR(GridTooCoarse);
QWALK_DEFINE_ERROR(EmptyWindow);
QWALK_DEFINE_ERROR(ConfigError);

#undef QWALK_DEFINE_ERROR

}  // namespace qwalk
