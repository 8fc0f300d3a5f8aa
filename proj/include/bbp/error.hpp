#pragma once

#include <stdexcept>
#include <string>

namespace bbp {

//! Failure categories raised by the library. The CLI maps these onto exit codes.
enum class ErrorCode
{
    InvalidArgument,
    InvalidDistribution,
    EmptyHistogram,
    IndexOutOfRange,
    DimensionMismatch,
    TotalMismatch,
    DegreeExceedsSample,
    SampleTooSmall,
    OddExponent,
    DuplicateMonomial,
    DomainTooLarge,
    DegreeGate,
    TooLarge,
    SourceExhausted,
    TokenUnknown,
    SubprocessFailure,
    ParseError,
};

inline char const* to_string(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidDistribution: return "InvalidDistribution";
        case ErrorCode::EmptyHistogram: return "EmptyHistogram";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TotalMismatch: return "TotalMismatch";
        case ErrorCode::DegreeExceedsSample: return "DegreeExceedsSample";
        case ErrorCode::SampleTooSmall: return "SampleTooSmall";
        case ErrorCode::OddExponent: return "OddExponent";
        case ErrorCode::DuplicateMonomial: return "DuplicateMonomial";
        case ErrorCode::DomainTooLarge: return "DomainTooLarge";
        case ErrorCode::DegreeGate: return "DegreeGate";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::SourceExhausted: return "SourceExhausted";
        case ErrorCode::TokenUnknown: return "TokenUnknown";
        case ErrorCode::SubprocessFailure: return "SubprocessFailure";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, std::string const& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

//! Raised when a divergence's degree exceeds the sample sizes it is
//! compiled for. Carries the minimal sample sizes that would succeed.
class DegreeGateError : public Error
{
  public:
    DegreeGateError(int n_required, int m_required, std::string const& what)
        : Error(ErrorCode::DegreeGate,
                what + " (requires n >= " + std::to_string(n_required)
                    + ", m >= " + std::to_string(m_required) + ")")
        , n_required_(n_required)
        , m_required_(m_required)
    {
    }

    int n_required() const noexcept { return n_required_; }
    int m_required() const noexcept { return m_required_; }

  private:
    int n_required_;
    int m_required_;
};

namespace detail {
[[noreturn]] inline void fail(ErrorCode code, std::string const& what)
{
    throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, std::string const& what)
{
    if (!cond)
        fail(code, what);
}
}  // namespace detail

}  // namespace bbp
