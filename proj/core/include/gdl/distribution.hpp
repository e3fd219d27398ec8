#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gdl/rng.hpp"
#include "gdl/value.hpp"

namespace gdl {

enum class DistFamily { Normal, Lognormal, Exponential, Uniform, Bernoulli, Poisson, Discrete };

std::optional<DistFamily> dist_family_from_name(std::string_view name);
std::string_view to_string(DistFamily family);

struct ParamInfo {
  std::string_view name;
  std::string_view admissible;
};

// A parameterised distribution. Numeric parameters are supplied per call
// (they may come from rule variables); `discrete` instead carries its atoms
// and weights as part of the spec because they are literal lists.
//
// Conventions: normal(mean, var) and lognormal(mu, var) take a VARIANCE;
// lognormal is exp of normal(mu, var), so its median is e^mu.
//
// Sampling algorithms (each a fixed function of the stream words):
//   normal       Box-Muller cosine branch, two words per draw
//   lognormal    exp of the normal draw
//   exponential  inversion, -log(u)/rate, one word
//   uniform      lo + (hi - lo) u, one word
//   bernoulli    u < p, one word
//   poisson      sequential inversion for rate <= 500, PTRS rejection above
//   discrete     inversion over cumulative weights, one word
class DistSpec {
 public:
  // Every family except Discrete; throws InvalidArgument for Discrete.
  static DistSpec of(DistFamily family);
  // Errors: ParamOutOfDomain (empty, non-positive weight, weights not summing
  // to 1 within 1e-9, length mismatch); ParamTypeMismatch (mixed atom types).
  static DistSpec discrete(std::vector<Value> atoms, std::vector<double> weights);

  DistFamily family() const { return family_; }
  std::string_view name() const { return to_string(family_); }
  std::span<const ParamInfo> params() const;
  ValueType result_type() const;

  const std::vector<Value>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  friend bool operator==(const DistSpec&, const DistSpec&) = default;

 private:
  DistFamily family_ = DistFamily::Normal;
  std::vector<Value> atoms_;
  std::vector<double> weights_;
};

// Errors: DistParamArity (wrong count), ParamTypeMismatch (non-numeric),
// ParamOutOfDomain (names the parameter and its admissible set).
void validate_params(const DistSpec& spec, std::span<const Value> params);

Value sample(const DistSpec& spec, std::span<const Value> params, RngStream& stream);

// P(X <= x).
double cdf(const DistSpec& spec, std::span<const Value> params, double x);

// Whether `v` lies in the declared support for these parameters.
bool in_support(const DistSpec& spec, std::span<const Value> params, const Value& v);

double normal_cdf(double z);
// Inverse of normal_cdf on (0, 1), accurate to about 1e-15.
double normal_quantile(double p);

}  // namespace gdl
