#pragma once

#include <stdexcept>
#include <string>

namespace scribkit {

/// Error categories raised by the toolkit. Loaders and operations throw
/// Error with the matching code; callers that need to branch on the cause
/// should test code() rather than parse the message.
enum class Errc {
    non_finite_value,
    degenerate_pixel,
    grid_mismatch,
    class_set_mismatch,
    format_error,
    shape_mismatch,
    empty_annotation,
    unlabeled_pixel,
    instance_too_large,
    empty_evaluation,
    missing_ground_truth,
    missing_prediction,
    duplicate_scribble,
    io_error,
    invalid_argument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace scribkit
