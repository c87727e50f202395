#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loras {

enum class ErrorKind {
    // dataset
    EmptyFile,
    MissingColumn,
    NonNumericCell,
    MoreThanTwoLabels,
    DegenerateLabels,
    InvalidDataset,
    TooManyFolds,
    // neighbors / embedding
    KTooLarge,
    PerplexityTooLarge,
    InvalidArgument,
    // samplers
    EmptyMinority,
    ConstraintViolated,
    // theory
    DofTooSmall,
    // evaluate
    NonFiniteLoss,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace loras
