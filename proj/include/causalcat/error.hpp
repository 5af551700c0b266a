#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace causalcat {

/// Broad failure class; the CLI maps it to a process exit code.
enum class ErrorKind {
    Usage,      // bad arguments or configuration
    Data,       // malformed or inconsistent input data
    Divergence  // training produced a non-finite loss
};

/// Base for every error raised by the library. `code()` is a stable,
/// machine-readable identifier such as "MissingColumn".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, ErrorKind kind = ErrorKind::Data)
        : std::runtime_error(message), code_(std::move(code)), kind_(kind) {}

    const std::string& code() const noexcept { return code_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string code_;
    ErrorKind kind_;
};

#define CAUSALCAT_DEFINE_ERROR(Name, Kind)                                  \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& message)                           \
            : Error(#Name, message, ErrorKind::Kind) {}                     \
    };

CAUSALCAT_DEFINE_ERROR(IoError, Data)
CAUSALCAT_DEFINE_ERROR(MissingColumn, Data)
CAUSALCAT_DEFINE_ERROR(BadCategoryCode, Data)
CAUSALCAT_DEFINE_ERROR(BadCauseFlag, Data)
CAUSALCAT_DEFINE_ERROR(EncodingError, Data)
CAUSALCAT_DEFINE_ERROR(MalformedCsv, Data)
CAUSALCAT_DEFINE_ERROR(DuplicateId, Data)
CAUSALCAT_DEFINE_ERROR(TooFewItems, Data)
CAUSALCAT_DEFINE_ERROR(EmptyLexicon, Data)
CAUSALCAT_DEFINE_ERROR(EmptyCorpus, Data)
CAUSALCAT_DEFINE_ERROR(InvalidConfig, Usage)
CAUSALCAT_DEFINE_ERROR(ShapeMismatch, Data)
CAUSALCAT_DEFINE_ERROR(AllMaskedRow, Data)
CAUSALCAT_DEFINE_ERROR(LengthMismatch, Data)
CAUSALCAT_DEFINE_ERROR(EmptyInput, Data)
CAUSALCAT_DEFINE_ERROR(InvalidMatrix, Data)
CAUSALCAT_DEFINE_ERROR(DegenerateAgreement, Data)
CAUSALCAT_DEFINE_ERROR(DivergedLoss, Divergence)
CAUSALCAT_DEFINE_ERROR(IncompatibleCheckpoint, Data)
CAUSALCAT_DEFINE_ERROR(MalformedCheckpoint, Data)
CAUSALCAT_DEFINE_ERROR(MalformedReport, Data)

#undef CAUSALCAT_DEFINE_ERROR

}  // namespace causalcat
