#pragma once

#include <stdexcept>
#include <string>

namespace sdist {

/// Machine-readable reason attached to every library error.
enum class Errc {
    non_positive_argument,
    invalid_params,
    telecom_below_face_to_face,
    subsidy_out_of_range,
    missing_task,
    missing_context,
    invalid_profile,
    duplicate_code,
    unknown_size_bin,
    bad_csv,
    degenerate_calibration,
    bad_target,
    missing_file,
    bad_config,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Argument outside the domain on which a model formula is derived.
class DomainError : public Error {
    using Error::Error;
};

/// Occupation profile lacks data needed to evaluate an exposure rule.
class ClassificationError : public Error {
    using Error::Error;
};

/// Malformed or inconsistent input records.
class IngestionError : public Error {
    using Error::Error;
};

class CalibrationError : public Error {
    using Error::Error;
};

/// Bad run configuration or command-line usage; maps to exit code 2.
class ConfigError : public Error {
    using Error::Error;
};

}  // namespace sdist
