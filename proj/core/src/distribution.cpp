#include "gdl/distribution.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "gdl/error.hpp"

namespace gdl {

std::optional<DistFamily> dist_family_from_name(std::string_view name) {
  if (name == "normal") return DistFamily::Normal;
  if (name == "lognormal") return DistFamily::Lognormal;
  if (name == "exponential") return DistFamily::Exponential;
  if (name == "uniform") return DistFamily::Uniform;
  if (name == "bernoulli") return DistFamily::Bernoulli;
  if (name == "poisson") return DistFamily::Poisson;
  if (name == "discrete") return DistFamily::Discrete;
  return std::nullopt;
}

std::string_view to_string(DistFamily family) {
  switch (family) {
    case DistFamily::Normal: return "normal";
    case DistFamily::Lognormal: return "lognormal";
    case DistFamily::Exponential: return "exponential";
    case DistFamily::Uniform: return "uniform";
    case DistFamily::Bernoulli: return "bernoulli";
    case DistFamily::Poisson: return "poisson";
    case DistFamily::Discrete: return "discrete";
  }
  return "?";
}

namespace {

constexpr ParamInfo kNormal[] = {{"mean", "real"}, {"var", "real > 0"}};
constexpr ParamInfo kLognormal[] = {{"mu", "real"}, {"var", "real > 0"}};
constexpr ParamInfo kRate[] = {{"rate", "real > 0"}};
constexpr ParamInfo kUniform[] = {{"lo", "real < hi"}, {"hi", "real > lo"}};
constexpr ParamInfo kBernoulli[] = {{"p", "real in (0, 1)"}};

}  // namespace

DistSpec DistSpec::of(DistFamily family) {
  if (family == DistFamily::Discrete) {
    throw Error(ErrorKind::InvalidArgument, "discrete needs atoms and weights");
  }
  DistSpec s;
  s.family_ = family;
  return s;
}

DistSpec DistSpec::discrete(std::vector<Value> atoms, std::vector<double> weights) {
  if (atoms.empty()) {
    throw Error(ErrorKind::ParamOutOfDomain, "discrete: values must be a nonempty list");
  }
  if (atoms.size() != weights.size()) {
    throw Error(ErrorKind::ParamOutOfDomain,
                "discrete: values and weights must have the same length");
  }
  for (const auto& a : atoms) {
    if (a.type() != atoms.front().type()) {
      throw Error(ErrorKind::ParamTypeMismatch, "discrete: all values must share one type");
    }
  }
  double total = 0;
  for (double w : weights) {
    if (!(w > 0) || !std::isfinite(w)) {
      throw Error(ErrorKind::ParamOutOfDomain, "discrete: weights must be > 0");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::ParamOutOfDomain, "discrete: weights must sum to 1 within 1e-9");
  }
  DistSpec s;
  s.family_ = DistFamily::Discrete;
  s.atoms_ = std::move(atoms);
  s.weights_ = std::move(weights);
  return s;
}

std::span<const ParamInfo> DistSpec::params() const {
  switch (family_) {
    case DistFamily::Normal: return kNormal;
    case DistFamily::Lognormal: return kLognormal;
    case DistFamily::Exponential:
    case DistFamily::Poisson: return kRate;
    case DistFamily::Uniform: return kUniform;
    case DistFamily::Bernoulli: return kBernoulli;
    case DistFamily::Discrete: return {};
  }
  return {};
}

ValueType DistSpec::result_type() const {
  switch (family_) {
    case DistFamily::Bernoulli:
    case DistFamily::Poisson: return ValueType::Integer;
    case DistFamily::Discrete: return atoms_.front().type();
    default: return ValueType::Real;
  }
}

namespace {

[[noreturn]] void out_of_domain(const DistSpec& spec, std::size_t i, double value) {
  const auto& p = spec.params()[i];
  throw Error(ErrorKind::ParamOutOfDomain,
              std::string(spec.name()) + ": parameter '" + std::string(p.name) + "' = " +
                  format_real(value) + " is outside its admissible set (" +
                  std::string(p.admissible) + ")");
}

// Numeric parameter values after validation.
struct Params {
  double v[2] = {0, 0};
};

Params checked(const DistSpec& spec, std::span<const Value> params) {
  validate_params(spec, params);
  Params p;
  for (std::size_t i = 0; i < params.size(); ++i) p.v[i] = params[i].as_number();
  return p;
}

}  // namespace

void validate_params(const DistSpec& spec, std::span<const Value> params) {
  const auto sig = spec.params();
  if (params.size() != sig.size()) {
    throw Error(ErrorKind::DistParamArity, std::string(spec.name()) + " takes " +
                                               std::to_string(sig.size()) + " parameters, got " +
                                               std::to_string(params.size()));
  }
  double v[2] = {0, 0};
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].is_numeric()) {
      throw Error(ErrorKind::ParamTypeMismatch,
                  std::string(spec.name()) + ": parameter '" + std::string(sig[i].name) +
                      "' must be numeric, got " + std::string(to_string(params[i].type())));
    }
    v[i] = params[i].as_number();
  }
  switch (spec.family()) {
    case DistFamily::Normal:
    case DistFamily::Lognormal:
      if (!(v[1] > 0)) out_of_domain(spec, 1, v[1]);
      break;
    case DistFamily::Exponential:
    case DistFamily::Poisson:
      if (!(v[0] > 0)) out_of_domain(spec, 0, v[0]);
      break;
    case DistFamily::Uniform:
      if (!(v[0] < v[1])) out_of_domain(spec, 0, v[0]);
      if (!std::isfinite(v[1] - v[0])) out_of_domain(spec, 1, v[1]);
      break;
    case DistFamily::Bernoulli:
      if (!(v[0] > 0 && v[0] < 1)) out_of_domain(spec, 0, v[0]);
      break;
    case DistFamily::Discrete:
      break;
  }
}

namespace {

double standard_normal(RngStream& s) {
  double u1 = s.next_open_unit();
  double u2 = s.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t poisson_inversion(double rate, RngStream& s) {
  double u = s.next_unit();
  double p = std::exp(-rate);
  double cum = p;
  std::int64_t k = 0;
  const double cap = rate + 60.0 * std::sqrt(rate) + 60.0;
  while (u > cum && k < cap) {
    ++k;
    p *= rate / static_cast<double>(k);
    cum += p;
  }
  return k;
}

// Hörmann's transformed rejection with squeeze (PTRS), for rate >= 10.
std::int64_t poisson_ptrs(double rate, RngStream& s) {
  const double slam = std::sqrt(rate);
  const double loglam = std::log(rate);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  for (;;) {
    double u = s.next_unit() - 0.5;
    double v = s.next_open_unit();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -rate + k * loglam - std::lgamma(k + 1)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

}  // namespace

Value sample(const DistSpec& spec, std::span<const Value> params, RngStream& stream) {
  const Params p = checked(spec, params);
  switch (spec.family()) {
    case DistFamily::Normal:
      return Value::real(p.v[0] + std::sqrt(p.v[1]) * standard_normal(stream));
    case DistFamily::Lognormal: {
      double x = std::exp(p.v[0] + std::sqrt(p.v[1]) * standard_normal(stream));
      if (!std::isfinite(x) || x <= 0) {
        throw Error(ErrorKind::OverflowToNonFinite, "lognormal draw is not a positive finite real");
      }
      return Value::real(x);
    }
    case DistFamily::Exponential:
      return Value::real(-std::log(stream.next_open_unit()) / p.v[0]);
    case DistFamily::Uniform:
      return Value::real(p.v[0] + (p.v[1] - p.v[0]) * stream.next_unit());
    case DistFamily::Bernoulli:
      return Value::integer(stream.next_unit() < p.v[0] ? 1 : 0);
    case DistFamily::Poisson:
      return Value::integer(p.v[0] <= 500 ? poisson_inversion(p.v[0], stream)
                                          : poisson_ptrs(p.v[0], stream));
    case DistFamily::Discrete: {
      double u = stream.next_unit();
      double cum = 0;
      for (std::size_t i = 0; i < spec.atoms().size(); ++i) {
        cum += spec.weights()[i];
        if (u < cum) return spec.atoms()[i];
      }
      return spec.atoms().back();
    }
  }
  throw Error(ErrorKind::Unsupported, "unknown distribution family");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0 && p < 1)) {
    throw Error(ErrorKind::DomainError, "normal_quantile needs p in (0, 1)");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // One Halley step against the exact cdf.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

namespace {

double poisson_cdf(double rate, double x) {
  if (x < 0) return 0.0;
  const double top = std::floor(x);
  const double loglam = std::log(rate);
  double sum = 0;
  for (double k = 0; k <= top; k += 1) {
    double term = std::exp(k * loglam - rate - std::lgamma(k + 1));
    sum += term;
    if (k > rate && term < 1e-18 * sum) break;
  }
  return std::min(sum, 1.0);
}

}  // namespace

double cdf(const DistSpec& spec, std::span<const Value> params, double x) {
  const Params p = checked(spec, params);
  switch (spec.family()) {
    case DistFamily::Normal: return normal_cdf((x - p.v[0]) / std::sqrt(p.v[1]));
    case DistFamily::Lognormal:
      return x <= 0 ? 0.0 : normal_cdf((std::log(x) - p.v[0]) / std::sqrt(p.v[1]));
    case DistFamily::Exponential: return x <= 0 ? 0.0 : -std::expm1(-p.v[0] * x);
    case DistFamily::Uniform:
      if (x <= p.v[0]) return 0.0;
      if (x >= p.v[1]) return 1.0;
      return (x - p.v[0]) / (p.v[1] - p.v[0]);
    case DistFamily::Bernoulli:
      if (x < 0) return 0.0;
      return x < 1 ? 1 - p.v[0] : 1.0;
    case DistFamily::Poisson: return poisson_cdf(p.v[0], x);
    case DistFamily::Discrete: {
      if (!is_numeric(spec.result_type())) {
        throw Error(ErrorKind::Unsupported, "cdf of a discrete distribution over " +
                                                std::string(to_string(spec.result_type())));
      }
      double total = 0;
      for (std::size_t i = 0; i < spec.atoms().size(); ++i) {
        if (spec.atoms()[i].as_number() <= x) total += spec.weights()[i];
      }
      return std::min(total, 1.0);
    }
  }
  throw Error(ErrorKind::Unsupported, "unknown distribution family");
}

bool in_support(const DistSpec& spec, std::span<const Value> params, const Value& v) {
  const Params p = checked(spec, params);
  if (v.type() != spec.result_type()) return false;
  switch (spec.family()) {
    case DistFamily::Normal: return true;
    case DistFamily::Lognormal:
    case DistFamily::Exponential: return v.as_real() > 0;
    case DistFamily::Uniform: return v.as_real() >= p.v[0] && v.as_real() <= p.v[1];
    case DistFamily::Bernoulli: return v.as_integer() == 0 || v.as_integer() == 1;
    case DistFamily::Poisson: return v.as_integer() >= 0;
    case DistFamily::Discrete:
      for (const auto& a : spec.atoms()) {
        if (a == v) return true;
      }
      return false;
  }
  return false;
}

}  // namespace gdl
