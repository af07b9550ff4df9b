#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lipgeo {

enum class ErrorKind {
    ParseError,
    ConeViolation,
    DuplicateVertex,
    TooFewVertices,
    NotSimple,
    InvalidT,
    NotSynchronizable,
    BothZero,
    TruncationTooShort,
    DifferentComponents,
    CoincidentArcs,
    SouthPole,
    OutsideDomain,
    ConeTooNarrow,
    NonPositiveLeading,
    SeparationViolated,
    UnboundedFamily,
    RaysParallel,
    DegenerateWedge,
    NoThetaFound,
    AllCollinear,
    CollinearTriple,
    SelfIntersectingChain,
    NotFound,
    AngleNotPi,
    ClearanceFailed,
    TordMismatch,
    NoEpsilonFound,
    PreconditionFailed,
    NotLNEInput,
    PipelineStuck,
    UnstableCombinatorics,
    ExponentUnstable,
    HasOpenComponents,
    EpsilonTooLarge,
};

inline std::string_view to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConeViolation: return "ConeViolation";
    case ErrorKind::DuplicateVertex: return "DuplicateVertex";
    case ErrorKind::TooFewVertices: return "TooFewVertices";
    case ErrorKind::NotSimple: return "NotSimple";
    case ErrorKind::InvalidT: return "InvalidT";
    case ErrorKind::NotSynchronizable: return "NotSynchronizable";
    case ErrorKind::BothZero: return "BothZero";
    case ErrorKind::TruncationTooShort: return "TruncationTooShort";
    case ErrorKind::DifferentComponents: return "DifferentComponents";
    case ErrorKind::CoincidentArcs: return "CoincidentArcs";
    case ErrorKind::SouthPole: return "SouthPole";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::ConeTooNarrow: return "ConeTooNarrow";
    case ErrorKind::NonPositiveLeading: return "NonPositiveLeading";
    case ErrorKind::SeparationViolated: return "SeparationViolated";
    case ErrorKind::UnboundedFamily: return "UnboundedFamily";
    case ErrorKind::RaysParallel: return "RaysParallel";
    case ErrorKind::DegenerateWedge: return "DegenerateWedge";
    case ErrorKind::NoThetaFound: return "NoThetaFound";
    case ErrorKind::AllCollinear: return "AllCollinear";
    case ErrorKind::CollinearTriple: return "CollinearTriple";
    case ErrorKind::SelfIntersectingChain: return "SelfIntersectingChain";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::AngleNotPi: return "AngleNotPi";
    case ErrorKind::ClearanceFailed: return "ClearanceFailed";
    case ErrorKind::TordMismatch: return "TordMismatch";
    case ErrorKind::NoEpsilonFound: return "NoEpsilonFound";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::NotLNEInput: return "NotLNEInput";
    case ErrorKind::PipelineStuck: return "PipelineStuck";
    case ErrorKind::UnstableCombinatorics: return "UnstableCombinatorics";
    case ErrorKind::ExponentUnstable: return "ExponentUnstable";
    case ErrorKind::HasOpenComponents: return "HasOpenComponents";
    case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

} // namespace lipgeo
