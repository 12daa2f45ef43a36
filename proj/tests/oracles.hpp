#pragma once

// Reference values computed outside this code base (30-digit mpmath), frozen
// here so the tests do not recompute them with the code under test.

namespace oracle {

inline constexpr double kInvE = 0.36787944117144232160;
inline constexpr double kInv2E = 0.18393972058572116080;
inline constexpr double kTwoESquared = 14.778112197861300454;  // 2 e^2

// Exact flow of b(x) = x log(1/x): X_t(x0) = x0^(e^-t).
inline constexpr double kFlow01T1 = 0.42866750067806062805;
inline constexpr double kFlow01T1Squared = 0.18375582613757510901;
inline constexpr double kFlow01T1InvSquared = 5.4420043218184312818;
struct FlowValue {
  double x0, t, value;
};
inline constexpr FlowValue kFlowTable[] = {
    {0.01, 0.5, 0.061226393812026783077}, {0.01, 1.0, 0.18375582613757510901},
    {0.01, 2.0, 0.53620323957295925457},  {0.1, 0.5, 0.24743967711752855235},
    {0.1, 1.0, 0.42866750067806062805},   {0.1, 2.0, 0.73225899760464483798},
    {0.3, 0.5, 0.48179025305211819827},   {0.3, 1.0, 0.64216060537593240493},
    {0.3, 2.0, 0.8496421650051275592},
};

inline constexpr double kDriftAt01 = 0.2302585092994045684;      // 0.1 log 10
inline constexpr double kNoncontactExample = 0.67957045711476130884;  // 4e/16
inline constexpr double kEscapeZeroGrowth = 0.049787068367863942979;  // e^-3
inline constexpr double kLogLogComparison = 0.065988035845312537077;  // e^-e
inline constexpr double kFeasibilityRatio = 1.6116719486498289194e-4;  // 10^((1/e - 1) 6)

// 2p e^-t for the Hoelder exponent of the exact flow.
inline constexpr double kTwoExpMinusHalf = 1.2130613194252668472;
inline constexpr double kTwoExpMinusOne = 0.73575888234288464319;
inline constexpr double kTwoExpMinusTwo = 0.27067056647322538379;

}  // namespace oracle
