#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gcusp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  ZeroImage,
  AtInfinity,
  NonPositiveDiagonal,
  Singular,
  UnsortedWeyl,
  NegativeWeyl,
  OutsideChart,
  DegenerateDirection,
  KernelViolation,
  NotInGroup,
  UnsupportedBranch,
  NotInterior,
  NotOnBoundary,
  NonPositiveScale,
  UnsupportedPsi,
  ZeroPsi,
  RotationalPartOutsidePsi,
  DegenerateLattice,
  UnsupportedLattice,
  MixedPsi,
  UnsupportedGroupShape,
  ComplexSpectrum,
  MixedSigns,
  DegenerateSpectrum,
  OrderViolation,
  DegeneratePatch,
  UnsupportedDimension,
  ParseError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroImage: return "ZeroImage";
    case ErrorCode::AtInfinity: return "AtInfinity";
    case ErrorCode::NonPositiveDiagonal: return "NonPositiveDiagonal";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::UnsortedWeyl: return "UnsortedWeyl";
    case ErrorCode::NegativeWeyl: return "NegativeWeyl";
    case ErrorCode::OutsideChart: return "OutsideChart";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::KernelViolation: return "KernelViolation";
    case ErrorCode::NotInGroup: return "NotInGroup";
    case ErrorCode::UnsupportedBranch: return "UnsupportedBranch";
    case ErrorCode::NotInterior: return "NotInterior";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::UnsupportedPsi: return "UnsupportedPsi";
    case ErrorCode::ZeroPsi: return "ZeroPsi";
    case ErrorCode::RotationalPartOutsidePsi: return "RotationalPartOutsidePsi";
    case ErrorCode::DegenerateLattice: return "DegenerateLattice";
    case ErrorCode::UnsupportedLattice: return "UnsupportedLattice";
    case ErrorCode::MixedPsi: return "MixedPsi";
    case ErrorCode::UnsupportedGroupShape: return "UnsupportedGroupShape";
    case ErrorCode::ComplexSpectrum: return "ComplexSpectrum";
    case ErrorCode::MixedSigns: return "MixedSigns";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::DegeneratePatch: return "DegeneratePatch";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

// Shared tolerances. Every operation that compares floats reads from here.
struct NumericSettings {
  double equality = 1e-9;       // membership, boundary tests
  double invertibility = 1e-12; // |det| relative to ||m||^dim
  double weyl_zero = 1e-12;     // psi_i == 0, psi_i == psi_j
  double group_residual = 1e-8; // factorization residuals
  double jordan_cutoff = 1e-8;  // singular-value cutoff relative to ||g||
};

inline NumericSettings& settings() {
  static NumericSettings s;
  return s;
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want)
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": expected " + std::to_string(want) + ", got " +
             std::to_string(got));
}

}  // namespace gcusp
