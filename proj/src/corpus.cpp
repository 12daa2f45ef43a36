#include "nlflow/corpus.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nlflow/errors.hpp"

namespace nlflow {
namespace {

constexpr double kInvE = 0.36787944117144233;

const std::vector<CorpusEntry> kEntries = {
    {"ZeroField", "sigma = 0, b = 0", {{"dim", 1}}},
    {"IdentityDrift", "b(x) = x, sigma = 0 (unbounded)", {{"dim", 1}}},
    {"LipschitzBaseline", "b(x) = drift*x, sigma(x) = noise*x (unbounded)",
     {{"dim", 1}, {"drift", -1.0}, {"noise", 0.0}}},
    {"ConstantDiffusion", "sigma = c*I*f_R(|x|), b = 0",
     {{"dim", 1}, {"c", 1.0}, {"truncation", 2.0}}},
    {"LogDriftDeterministic", "b(x) = x log(1/|x|) f_1(|x|), sigma = 0", {{"dim", 1}}},
    {"LogDiffusion", "sigma(x) = c x sqrt(log(1+1/|x|)) f_1(|x|), b = 0",
     {{"dim", 1}, {"c", 1.0}}},
    {"EscapeGrowthField", "sigma(x) = c x sqrt(f(|x|^2)), f logarithmic growth, b = 0",
     {{"dim", 1}, {"c", 0.5}}},
};

FieldParams resolve(const CorpusEntry& entry, const FieldParams& given) {
  FieldParams out = entry.defaults;
  for (const auto& [k, v] : given) {
    if (!out.contains(k)) {
      throw ParameterError(fmt::format("field {} has no parameter '{}'", entry.name, k));
    }
    if (!std::isfinite(v)) {
      throw ParameterError(fmt::format("field parameter '{}' must be finite", k));
    }
    out[k] = v;
  }
  const double dim = out["dim"];
  if (!(dim >= 1.0) || dim != std::floor(dim)) {
    throw ParameterError(fmt::format("dim must be a positive integer, got {}", dim));
  }
  return out;
}

void zero(std::span<const double>, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
}

}  // namespace

const std::vector<CorpusEntry>& corpus_entries() { return kEntries; }

std::vector<std::string> corpus_names() {
  std::vector<std::string> names;
  for (const auto& e : kEntries) names.push_back(e.name);
  return names;
}

CoefficientField make_example_field(std::string_view name, const FieldParams& given) {
  auto it = std::find_if(kEntries.begin(), kEntries.end(),
                         [&](const CorpusEntry& e) { return e.name == name; });
  if (it == kEntries.end()) {
    throw UnknownNameError(fmt::format("unknown corpus field '{}'", name));
  }
  const FieldParams p = resolve(*it, given);
  const auto d = static_cast<std::size_t>(p.at("dim"));

  CoefficientField f{.name = it->name,
                     .params = p,
                     .dim_state = d,
                     .dim_noise = 1,
                     .sigma = zero,
                     .drift = zero,
                     .support_radius = std::nullopt,
                     .modulus = ModulusSpec::log(1.0, kInvE),
                     .modulus_constant = 1.0,
                     .h1_radius = std::nullopt,
                     .growth = std::nullopt,
                     .diffusion_free = false};

  if (name == "ZeroField") {
    f.support_radius = 0.0;
    f.modulus = ModulusSpec::constant(1.0);
    f.diffusion_free = true;
  } else if (name == "IdentityDrift") {
    f.drift = [](std::span<const double> x, std::span<double> b) {
      std::copy(x.begin(), x.end(), b.begin());
    };
    f.modulus = ModulusSpec::constant(1.0);
    f.growth = GrowthSpec::logarithmic();
    f.diffusion_free = true;
  } else if (name == "LipschitzBaseline") {
    const double a = p.at("drift");
    const double s = p.at("noise");
    f.drift = [a](std::span<const double> x, std::span<double> b) {
      for (std::size_t i = 0; i < x.size(); ++i) b[i] = a * x[i];
    };
    f.sigma = [s](std::span<const double> x, std::span<double> out) {
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
    };
    f.modulus = ModulusSpec::constant(1.0);
    const double c = std::max(std::abs(a), s * s);
    f.modulus_constant = c > 0.0 ? c : 1.0;
    f.growth = GrowthSpec::logarithmic();
    f.diffusion_free = s == 0.0;
  } else if (name == "ConstantDiffusion") {
    const double c = p.at("c");
    const double radius = p.at("truncation");
    if (!(radius > 0.0)) throw ParameterError("truncation must be positive");
    f.dim_noise = d;
    f.sigma = [c, radius, d](std::span<const double> x, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      const double cut = smooth_cutoff(euclidean_norm(x), radius);
      for (std::size_t i = 0; i < d; ++i) out[i * d + i] = c * cut;
    };
    f.support_radius = radius + 1.0;
    f.modulus = ModulusSpec::constant(1.0);
    // ||sigma(x) - sigma(y)||_F^2 = c^2 d (f_R(x) - f_R(y))^2
    const double bound = c * c * static_cast<double>(d) * kCutoffMaxSlope * kCutoffMaxSlope;
    f.modulus_constant = bound > 0.0 ? bound : 1.0;
    f.diffusion_free = c == 0.0;
  } else if (name == "LogDriftDeterministic") {
    f.drift = [](std::span<const double> x, std::span<double> b) {
      const double n = euclidean_norm(x);
      const double scale = n > 0.0 ? std::log(1.0 / n) * smooth_cutoff(n, 1.0) : 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) b[i] = x[i] * scale;
    };
    f.support_radius = 2.0;
    // sup of the sampled ratio is 1/2 + log 2 ~ 1.193, reached at |x-y|^2 = delta_o
    f.modulus_constant = 1.2;
    f.diffusion_free = true;
  } else if (name == "LogDiffusion") {
    const double c = p.at("c");
    f.sigma = [c](std::span<const double> x, std::span<double> out) {
      const double n = euclidean_norm(x);
      const double scale =
          n > 0.0 ? c * std::sqrt(std::log1p(1.0 / n)) * smooth_cutoff(n, 1.0) : 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
    };
    f.support_radius = 2.0;
    // sup of the sampled ratio is 1.875 c^2, inside the cutoff shell
    f.modulus_constant = c != 0.0 ? 1.9 * c * c : 1.0;
    f.diffusion_free = c == 0.0;
  } else if (name == "EscapeGrowthField") {
    const double c = p.at("c");
    const GrowthSpec growth = GrowthSpec::logarithmic();
    f.sigma = [c, growth](std::span<const double> x, std::span<double> out) {
      double n2 = 0.0;
      for (double v : x) n2 += v * v;
      const double scale = c * std::sqrt(growth.f(n2));
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
    };
    f.growth = growth;
    // Locally Lipschitz but superlinear: the Lipschitz constant used here is
    // the sup of |d/dx (x sqrt(f(x^2)))|^2 over |x| <= 5 (about 6.52), which
    // covers pairs based in B(4) with |x - y| <= 1.
    f.modulus = ModulusSpec::constant(1.0);
    f.h1_radius = 4.0;
    f.modulus_constant = c != 0.0 ? 6.6 * c * c : 1.0;
    f.diffusion_free = c == 0.0;
  }
  return f;
}

}  // namespace nlflow
