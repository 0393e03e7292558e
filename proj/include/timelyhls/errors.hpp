#pragma once

#include <stdexcept>
#include <string>

namespace timelyhls {

// Base of every error the library throws. Each subclass maps to one failure
// category that callers (the CLI, the refinement loop) branch on.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TIMELYHLS_DEFINE_ERROR(Name)            \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

TIMELYHLS_DEFINE_ERROR(ConfigError);
TIMELYHLS_DEFINE_ERROR(ValidationError);
TIMELYHLS_DEFINE_ERROR(NotFound);
TIMELYHLS_DEFINE_ERROR(ConflictError);
TIMELYHLS_DEFINE_ERROR(ContractError);
TIMELYHLS_DEFINE_ERROR(ExtractionError);
TIMELYHLS_DEFINE_ERROR(BackendError);
TIMELYHLS_DEFINE_ERROR(ScriptExhausted);
TIMELYHLS_DEFINE_ERROR(ToolMissing);
TIMELYHLS_DEFINE_ERROR(ToolTimeout);
TIMELYHLS_DEFINE_ERROR(MappingError);
TIMELYHLS_DEFINE_ERROR(VersionError);

#undef TIMELYHLS_DEFINE_ERROR

// Parse failures carry the offending line (1-based, 0 when not applicable)
// and the token or field name that failed.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::string token = {})
        : Error(what), line_(line), token_(std::move(token)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& token() const noexcept { return token_; }

private:
    std::size_t line_;
    std::string token_;
};

}  // namespace timelyhls
