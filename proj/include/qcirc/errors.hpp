#pragma once

#include <stdexcept>
#include <string>

namespace qcirc {

enum class ErrorCode {
    // netlist
    UnknownElementKind,
    MissingGround,
    NonPositiveValue,
    DanglingNode,
    Disconnected,
    AmbiguousLoopTag,
    // builder
    SingularCapacitance,
    PerfectCouplingSingular,
    DegenerateGauge,
    DominantPerturbation,
    // spectrum
    TruncationTooSmall,
    DimensionMismatch,
    NoConvergence,
    // network
    SingularAtSample,
    PoleAtInput,
    EvaluatedAtPole,
    NoResonanceInWindow,
    NegativeEffectiveCapacitance,
    NegativeParticipation,
    ZeroTurnRatio,
    NearDegenerateModes,
    // dynamics
    StepTooLarge,
    PoorFit,
    ThresholdSingularity,
    // perturb
    DegenerateAcrossBlocks,
    MixedParity,
    // io / cli
    IOFailure,
    InvalidArgument,
};

inline const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::UnknownElementKind: return "UnknownElementKind";
        case ErrorCode::MissingGround: return "MissingGround";
        case ErrorCode::NonPositiveValue: return "NonPositiveValue";
        case ErrorCode::DanglingNode: return "DanglingNode";
        case ErrorCode::Disconnected: return "Disconnected";
        case ErrorCode::AmbiguousLoopTag: return "AmbiguousLoopTag";
        case ErrorCode::SingularCapacitance: return "SingularCapacitance";
        case ErrorCode::PerfectCouplingSingular: return "PerfectCouplingSingular";
        case ErrorCode::DegenerateGauge: return "DegenerateGauge";
        case ErrorCode::DominantPerturbation: return "DominantPerturbation";
        case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SingularAtSample: return "SingularAtSample";
        case ErrorCode::PoleAtInput: return "PoleAtInput";
        case ErrorCode::EvaluatedAtPole: return "EvaluatedAtPole";
        case ErrorCode::NoResonanceInWindow: return "NoResonanceInWindow";
        case ErrorCode::NegativeEffectiveCapacitance: return "NegativeEffectiveCapacitance";
        case ErrorCode::NegativeParticipation: return "NegativeParticipation";
        case ErrorCode::ZeroTurnRatio: return "ZeroTurnRatio";
        case ErrorCode::NearDegenerateModes: return "NearDegenerateModes";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::PoorFit: return "PoorFit";
        case ErrorCode::ThresholdSingularity: return "ThresholdSingularity";
        case ErrorCode::DegenerateAcrossBlocks: return "DegenerateAcrossBlocks";
        case ErrorCode::MixedParity: return "MixedParity";
        case ErrorCode::IOFailure: return "IOFailure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

} // namespace qcirc
