#pragma once

#include <stdexcept>
#include <string>

namespace msi {

// Process exit codes, shared between the CLI and every typed error.
enum class ExitCode : int {
    Ok = 0,
    Config = 2,
    InputData = 3,
    Internal = 4,
};

class Error : public std::runtime_error {
public:
    Error(const char* kind, ExitCode code, const std::string& msg)
        : std::runtime_error(msg), kind_(kind), code_(code) {}
    const char* kind() const noexcept { return kind_; }
    ExitCode exit_code() const noexcept { return code_; }

private:
    const char* kind_;
    ExitCode code_;
};

#define MSI_ERROR_TYPE(Name, Code)                                          \
    class Name : public Error {                                             \
    public:                                                                  \
        explicit Name(const std::string& msg) : Error(#Name, Code, msg) {}   \
    }

// Configuration / argument errors.
MSI_ERROR_TYPE(ConfigInvalid, ExitCode::Config);
MSI_ERROR_TYPE(ConfigMismatch, ExitCode::Config);
MSI_ERROR_TYPE(InvalidRange, ExitCode::Config);
MSI_ERROR_TYPE(EpochOutOfRange, ExitCode::Config);

// Input-data errors.
MSI_ERROR_TYPE(MalformedDocument, ExitCode::InputData);
MSI_ERROR_TYPE(SchemaViolation, ExitCode::InputData);
MSI_ERROR_TYPE(DanglingReference, ExitCode::InputData);
MSI_ERROR_TYPE(DegeneratePolygon, ExitCode::InputData);
MSI_ERROR_TYPE(RunLengthMismatch, ExitCode::InputData);
MSI_ERROR_TYPE(InvalidEncoding, ExitCode::InputData);
MSI_ERROR_TYPE(MissingSegmentation, ExitCode::InputData);
MSI_ERROR_TYPE(MalformedManifest, ExitCode::InputData);
MSI_ERROR_TYPE(EmptyCategory, ExitCode::InputData);
MSI_ERROR_TYPE(MissingCaption, ExitCode::InputData);
MSI_ERROR_TYPE(ImageLoadFailure, ExitCode::InputData);
MSI_ERROR_TYPE(ZeroSizeBox, ExitCode::InputData);
MSI_ERROR_TYPE(IoFailure, ExitCode::InputData);
MSI_ERROR_TYPE(ShapeMismatch, ExitCode::InputData);
MSI_ERROR_TYPE(StepOutOfRange, ExitCode::InputData);
MSI_ERROR_TYPE(SampleIdMismatch, ExitCode::InputData);
MSI_ERROR_TYPE(EmptyCorpus, ExitCode::InputData);
MSI_ERROR_TYPE(ZeroVector, ExitCode::InputData);
MSI_ERROR_TYPE(DimensionMismatch, ExitCode::InputData);
MSI_ERROR_TYPE(UnpairedId, ExitCode::InputData);
MSI_ERROR_TYPE(BuildFailed, ExitCode::InputData);

// Broken internal invariants, not user-correctable.
MSI_ERROR_TYPE(InternalError, ExitCode::Internal);

#undef MSI_ERROR_TYPE

}  // namespace msi
