#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nlflow/coefficient_field.hpp"

namespace nlflow {

/// Built-in fields, addressable by name:
///
///   ZeroField              sigma = 0, b = 0
///   IdentityDrift          b(x) = x, sigma = 0 (unbounded)
///   LipschitzBaseline      b(x) = drift * x, sigma(x) = noise * x (m = 1)
///   ConstantDiffusion      sigma = c I f_R(|x|), b = 0
///   LogDriftDeterministic  b(x) = x log(1/|x|) f_1(|x|), b(0) = 0, sigma = 0;
///                          exact flow x0^(e^-t) for 0 < |x0| < 1
///   LogDiffusion           sigma(x) = c x sqrt(log(1 + 1/|x|)) f_1(|x|), b = 0
///   EscapeGrowthField      sigma(x) = c x sqrt(f(|x|^2)) with logarithmic
///                          growth f, b = 0 (unbounded)
///
/// Every field accepts `dim`; other parameters are listed by corpus_entries().
/// Unknown names raise UnknownNameError, unknown parameter keys ParameterError.
CoefficientField make_example_field(std::string_view name, const FieldParams& params = {});

struct CorpusEntry {
  std::string name;
  std::string description;
  FieldParams defaults;
};

const std::vector<CorpusEntry>& corpus_entries();
std::vector<std::string> corpus_names();

}  // namespace nlflow
