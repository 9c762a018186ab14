#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "morava/errors.hpp"

namespace morava {

using BigInt = boost::multiprecision::cpp_int;
// Arbitrary-precision rational, always stored reduced with positive denominator.
using BigRational = boost::multiprecision::cpp_rational;

// b^e with overflow check; e >= 0.
std::int64_t powi(std::int64_t b, std::int64_t e);

bool isPrime(std::int64_t p);

// The (p, n) pair every graded computation is relative to.  The coefficient
// field is F_p[v, v^-1] with deg v = -2(p^n - 1) (cohomological).
struct PrimeContext {
  std::int64_t p = 0;
  int n = 0;

  PrimeContext() = default;
  PrimeContext(std::int64_t p_, int n_);

  std::int64_t q() const { return powi(p, n); }        // p^n
  std::int64_t vPeriod() const { return q() - 1; }     // |deg v| / 2
  bool operator==(const PrimeContext& o) const { return p == o.p && n == o.n; }
  bool operator!=(const PrimeContext& o) const { return !(*this == o); }
};

// F_p helpers on int64 representatives.
std::int64_t fpNormalize(std::int64_t a, std::int64_t p);
std::int64_t fpInverse(std::int64_t a, std::int64_t p);

// Element of F_p[v, v^-1]: finite sum of c * v^e terms, kept sorted by e with
// coefficients in (0, p).  Carries its (p, n) tag so cross-context arithmetic
// is rejected instead of silently mixing moduli.
class GradedScalar {
 public:
  struct Term {
    std::int64_t vexp;
    std::int64_t c;
    bool operator==(const Term& o) const { return vexp == o.vexp && c == o.c; }
  };

  GradedScalar() = default;  // context-free zero; absorbed by any context
  explicit GradedScalar(const PrimeContext& ctx) : p_(ctx.p), n_(ctx.n) {}

  static GradedScalar zero(const PrimeContext& ctx) { return GradedScalar(ctx); }
  static GradedScalar one(const PrimeContext& ctx) { return make(ctx, 1, 0); }
  // c * v^e
  static GradedScalar make(const PrimeContext& ctx, std::int64_t c, std::int64_t vexp);
  static GradedScalar vpow(const PrimeContext& ctx, std::int64_t vexp) { return make(ctx, 1, vexp); }

  bool isZero() const { return terms_.empty(); }
  bool isMonomial() const { return terms_.size() == 1; }
  // Sole term of a monomial; error otherwise.
  Term monomial() const;
  const std::vector<Term>& terms() const { return terms_; }
  PrimeContext context() const;
  bool hasContext() const { return p_ != 0; }

  GradedScalar operator+(const GradedScalar& o) const;
  GradedScalar operator-(const GradedScalar& o) const;
  GradedScalar operator*(const GradedScalar& o) const;
  GradedScalar operator-() const;
  GradedScalar& operator+=(const GradedScalar& o) { return *this = *this + o; }
  GradedScalar& operator-=(const GradedScalar& o) { return *this = *this - o; }
  GradedScalar& operator*=(const GradedScalar& o) { return *this = *this * o; }
  bool operator==(const GradedScalar& o) const;
  bool operator!=(const GradedScalar& o) const { return !(*this == o); }

  // Multiply by c * v^e in place (fast path used by hot loops).
  void scaleBy(std::int64_t c, std::int64_t vexp);

  // Inverse of a monomial c*v^e; error on zero or a genuine sum.
  GradedScalar inverse() const;

  // Evaluation v -> 1 (the ungraded shadow used for F_p linear algebra).
  std::int64_t evalAtOne() const;

  std::string str() const;  // e.g. "2*v^-3 + 1"

 private:
  std::int64_t p_ = 0;
  int n_ = 0;
  std::vector<Term> terms_;

  void checkCompatible(const GradedScalar& o) const;
  void normalize();
  friend GradedScalar scalarArith(const GradedScalar&, const GradedScalar&, char);
};

// Reduce a p-integral rational mod p; error "non-p-integral value" when p
// divides the denominator.
std::int64_t pIntegralReduce(const BigRational& r, std::int64_t p);

}  // namespace morava
