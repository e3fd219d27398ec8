#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "gdl/distribution.hpp"
#include "gdl/error.hpp"
#include "gdl/functions.hpp"
#include "test_support.hpp"

using namespace gdl;
using gdl::testing::ks_statistic;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no gdl::Error thrown";
  return ErrorKind::Io;
}

std::vector<Value> reals(std::initializer_list<double> xs) {
  std::vector<Value> out;
  for (double x : xs) out.push_back(Value::real(x));
  return out;
}

std::vector<Value> draw(const DistSpec& spec, const std::vector<Value>& params, std::size_t n,
                        std::uint64_t salt) {
  RngStream s(Key128{0xd15cULL, salt});
  std::vector<Value> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(spec, params, s));
  return out;
}

constexpr std::size_t kN = 100000;

// Poisson pmf by the recurrence p(k) = p(k-1) * rate / k in long double.
std::vector<long double> poisson_pmf(long double rate, std::size_t upto) {
  std::vector<long double> p(upto + 1);
  p[0] = std::exp(-rate);
  for (std::size_t k = 1; k <= upto; ++k) p[k] = p[k - 1] * rate / static_cast<long double>(k);
  return p;
}

void expect_frequencies(const std::map<std::int64_t, double>& pmf, const std::vector<Value>& xs) {
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& v : xs) ++counts[v.as_integer()];
  double n = static_cast<double>(xs.size());
  for (const auto& [k, p] : pmf) {
    double freq = static_cast<double>(counts[k]) / n;
    EXPECT_NEAR(freq, p, 4 * std::sqrt(p * (1 - p) / n)) << "atom " << k;
  }
}

}  // namespace

TEST(ValidateParams, Examples) {
  EXPECT_NO_THROW(validate_params(DistSpec::of(DistFamily::Normal), reals({0.0, 1.0})));
  EXPECT_EQ(kind_of([] { validate_params(DistSpec::of(DistFamily::Bernoulli), reals({1.5})); }),
            ErrorKind::ParamOutOfDomain);
  EXPECT_NO_THROW(validate_params(DistSpec::of(DistFamily::Lognormal), reals({std::log(2.0), 0.1})));
}

TEST(ValidateParams, Errors) {
  auto normal = DistSpec::of(DistFamily::Normal);
  EXPECT_EQ(kind_of([&] { validate_params(normal, reals({0.0})); }), ErrorKind::DistParamArity);
  EXPECT_EQ(kind_of([&] { validate_params(normal, reals({0.0, 0.0})); }), ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(kind_of([&] {
              std::vector<Value> ps{Value::real(0.0), Value::string("x")};
              validate_params(normal, ps);
            }),
            ErrorKind::ParamTypeMismatch);
  EXPECT_EQ(kind_of([] { validate_params(DistSpec::of(DistFamily::Uniform), reals({2.0, 2.0})); }),
            ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(kind_of([] { validate_params(DistSpec::of(DistFamily::Exponential), reals({-1.0})); }),
            ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(kind_of([] { validate_params(DistSpec::of(DistFamily::Poisson), reals({0.0})); }),
            ErrorKind::ParamOutOfDomain);
  // Integers are accepted for real parameters.
  EXPECT_NO_THROW(validate_params(normal, std::vector<Value>{Value::integer(1), Value::integer(2)}));
}

TEST(DiscreteSpec, Errors) {
  EXPECT_EQ(kind_of([] { DistSpec::discrete({}, {}); }), ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(kind_of([] { DistSpec::discrete({Value::integer(1)}, {0.5}); }), ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(kind_of([] { DistSpec::discrete({Value::integer(1), Value::integer(2)}, {1.0}); }),
            ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(kind_of([] { DistSpec::discrete({Value::integer(1), Value::integer(2)}, {1.5, -0.5}); }),
            ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(kind_of([] { DistSpec::discrete({Value::integer(1), Value::string("a")}, {0.5, 0.5}); }),
            ErrorKind::ParamTypeMismatch);
  EXPECT_EQ(kind_of([] { DistSpec::of(DistFamily::Discrete); }), ErrorKind::InvalidArgument);
}

TEST(Sample, SupportAndDeterminism) {
  auto bern = DistSpec::of(DistFamily::Bernoulli);
  auto xs = draw(bern, reals({0.5}), 1000, 1);
  for (const auto& v : xs) EXPECT_TRUE(in_support(bern, reals({0.5}), v));
  EXPECT_EQ(xs, draw(bern, reals({0.5}), 1000, 1));

  struct Case {
    DistSpec spec;
    std::vector<Value> params;
  };
  std::vector<Case> cases = {
      {DistSpec::of(DistFamily::Normal), reals({1.0, 2.0})},
      {DistSpec::of(DistFamily::Lognormal), reals({0.0, 1.0})},
      {DistSpec::of(DistFamily::Exponential), reals({2.0})},
      {DistSpec::of(DistFamily::Uniform), reals({-1.0, 1.0})},
      {DistSpec::of(DistFamily::Poisson), reals({4.0})},
      {DistSpec::of(DistFamily::Poisson), reals({900.0})},
      {DistSpec::discrete({Value::string("a"), Value::string("b")}, {0.25, 0.75}), {}},
  };
  for (const auto& c : cases) {
    auto a = draw(c.spec, c.params, 500, 7);
    EXPECT_EQ(a, draw(c.spec, c.params, 500, 7)) << c.spec.name();
    for (const auto& v : a) {
      EXPECT_EQ(v.type(), c.spec.result_type());
      EXPECT_TRUE(in_support(c.spec, c.params, v)) << c.spec.name() << " " << to_string(v);
    }
  }
}

TEST(Sample, SingleAtomDiscrete) {
  auto spec = DistSpec::discrete({Value::string("a")}, {1.0});
  for (const auto& v : draw(spec, {}, 100, 3)) EXPECT_EQ(v, Value::string("a"));
}

TEST(Sample, NormalMeanOfFigureRow) {
  auto xs = draw(DistSpec::of(DistFamily::Normal), reals({20.2, 0.1}), kN, 11);
  double sum = 0;
  for (const auto& v : xs) sum += v.as_real();
  EXPECT_NEAR(sum / kN, 20.2, 0.01);
}

TEST(Sample, ContinuousFamiliesPassKolmogorovSmirnov) {
  struct Case {
    DistFamily family;
    std::vector<Value> params;
  };
  std::vector<Case> cases = {
      {DistFamily::Normal, reals({0.0, 1.0})},
      {DistFamily::Normal, reals({20.2, 0.1})},
      {DistFamily::Normal, reals({-5.0, 9.0})},
      {DistFamily::Lognormal, reals({std::log(2.0), 0.1})},
      {DistFamily::Lognormal, reals({0.0, 1.0})},
      {DistFamily::Lognormal, reals({1.5, 0.25})},
      {DistFamily::Exponential, reals({1.0})},
      {DistFamily::Exponential, reals({0.1})},
      {DistFamily::Exponential, reals({25.0})},
      {DistFamily::Uniform, reals({0.0, 1.0})},
      {DistFamily::Uniform, reals({-3.0, 7.0})},
      {DistFamily::Uniform, reals({100.0, 100.5})},
  };
  std::uint64_t salt = 100;
  for (const auto& c : cases) {
    auto spec = DistSpec::of(c.family);
    std::vector<double> xs;
    for (const auto& v : draw(spec, c.params, kN, salt++)) xs.push_back(v.as_real());
    double d = ks_statistic(xs, [&](double x) { return cdf(spec, c.params, x); });
    EXPECT_LT(d, 2.0 / std::sqrt(static_cast<double>(kN))) << spec.name();
  }
}

TEST(Sample, BernoulliFrequency) {
  auto xs = draw(DistSpec::of(DistFamily::Bernoulli), reals({0.3}), kN, 21);
  expect_frequencies({{0, 0.7}, {1, 0.3}}, xs);
}

TEST(Sample, PoissonFrequencies) {
  // 900 exercises the rejection sampler.
  for (double rate : {0.7, 12.0, 900.0}) {
    auto xs = draw(DistSpec::of(DistFamily::Poisson), reals({rate}), kN, 31);
    auto pmf = poisson_pmf(rate, static_cast<std::size_t>(rate * 2 + 20));
    std::map<std::int64_t, double> expect;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      if (pmf[k] > 1e-3) expect[static_cast<std::int64_t>(k)] = static_cast<double>(pmf[k]);
    }
    ASSERT_FALSE(expect.empty());
    expect_frequencies(expect, xs);
  }
}

TEST(Sample, DiscreteFrequencies) {
  auto spec = DistSpec::discrete({Value::integer(2), Value::integer(5), Value::integer(9)},
                                 {0.2, 0.5, 0.3});
  expect_frequencies({{2, 0.2}, {5, 0.5}, {9, 0.3}}, draw(spec, {}, kN, 41));
}

TEST(Cdf, ClosedFormExamples) {
  EXPECT_DOUBLE_EQ(cdf(DistSpec::of(DistFamily::Normal), reals({0.0, 1.0}), 0.0), 0.5);
  EXPECT_NEAR(cdf(DistSpec::of(DistFamily::Exponential), reals({1.0}), std::log(2.0)), 0.5, 1e-15);
}

TEST(Cdf, NormalMatchesQuadratureOfDensity) {
  double got = cdf(DistSpec::of(DistFamily::Normal), reals({21.0, 0.05}), 22.0);
  double want = gdl::testing::normal_cdf_by_quadrature(22.0, 21.0, 0.05);
  EXPECT_NEAR(got, want, 1e-10);

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> mean(-10, 10), var(0.01, 10), off(-6, 6);
  for (int i = 0; i < 200; ++i) {
    double m = mean(rng), v = var(rng), x = m + off(rng) * std::sqrt(v);
    EXPECT_NEAR(cdf(DistSpec::of(DistFamily::Normal), reals({m, v}), x),
                gdl::testing::normal_cdf_by_quadrature(x, m, v), 1e-10);
  }
}

TEST(Cdf, LognormalMatchesQuadrature) {
  // P(X <= x) = P(normal <= ln x)
  for (double x : {0.5, 1.0, 2.0, 3.7}) {
    EXPECT_NEAR(cdf(DistSpec::of(DistFamily::Lognormal), reals({std::log(2.0), 0.1}), x),
                gdl::testing::normal_cdf_by_quadrature(std::log(x), std::log(2.0), 0.1), 1e-10);
  }
}

TEST(Cdf, DiscreteFamiliesBySummation) {
  auto pmf = poisson_pmf(7.5L, 40);
  long double run = 0;
  for (std::size_t k = 0; k <= 40; ++k) {
    run += pmf[k];
    EXPECT_NEAR(cdf(DistSpec::of(DistFamily::Poisson), reals({7.5}), static_cast<double>(k) + 0.5),
                static_cast<double>(run), 1e-10);
  }
  auto spec = DistSpec::discrete({Value::real(1.0), Value::real(2.5)}, {0.4, 0.6});
  EXPECT_DOUBLE_EQ(cdf(spec, {}, 0.9), 0.0);
  EXPECT_DOUBLE_EQ(cdf(spec, {}, 1.0), 0.4);
  EXPECT_DOUBLE_EQ(cdf(spec, {}, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(cdf(DistSpec::of(DistFamily::Bernoulli), reals({0.3}), 0.5), 0.7);
}

TEST(Cdf, Monotone) {
  struct Case {
    DistSpec spec;
    std::vector<Value> params;
  };
  std::vector<Case> cases = {
      {DistSpec::of(DistFamily::Normal), reals({0.0, 1.0})},
      {DistSpec::of(DistFamily::Lognormal), reals({0.0, 1.0})},
      {DistSpec::of(DistFamily::Exponential), reals({1.0})},
      {DistSpec::of(DistFamily::Uniform), reals({-1.0, 1.0})},
      {DistSpec::of(DistFamily::Bernoulli), reals({0.3})},
      {DistSpec::of(DistFamily::Poisson), reals({5.0})},
  };
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-10, 20);
  for (const auto& c : cases) {
    for (int i = 0; i < 1000; ++i) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      EXPECT_LE(cdf(c.spec, c.params, a), cdf(c.spec, c.params, b)) << c.spec.name();
    }
  }
}

TEST(NormalQuantile, InvertsCdf) {
  for (double p : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.8, 0.975, 1 - 1e-9}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p);
  }
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
}

TEST(ApplyFn, Examples) {
  auto call = [](FnOp op, std::vector<Value> args) { return apply_fn(op, args); };
  EXPECT_EQ(call(FnOp::Add, reals({1.5, 2.5})), Value::real(4.0));
  EXPECT_EQ(call(FnOp::Ln, reals({1.0})), Value::real(0.0));
  EXPECT_EQ(kind_of([&] { call(FnOp::Ln, reals({-1.0})); }), ErrorKind::DomainError);
  EXPECT_EQ(kind_of([&] { call(FnOp::Div, reals({1.0, 0.0})); }), ErrorKind::DomainError);
  EXPECT_EQ(kind_of([&] { call(FnOp::Exp, reals({1000.0})); }), ErrorKind::OverflowToNonFinite);
  EXPECT_EQ(call(FnOp::Add, {Value::integer(2), Value::integer(3)}), Value::integer(5));
  EXPECT_EQ(call(FnOp::Add, {Value::integer(2), Value::real(0.5)}), Value::real(2.5));
  EXPECT_EQ(call(FnOp::Div, {Value::integer(3), Value::integer(2)}), Value::real(1.5));
  EXPECT_EQ(kind_of([&] { call(FnOp::Add, {Value::integer(INT64_MAX), Value::integer(1)}); }),
            ErrorKind::OverflowToNonFinite);
  EXPECT_EQ(kind_of([&] { call(FnOp::Add, {Value::string("a"), Value::integer(1)}); }),
            ErrorKind::TypeMismatch);
}
