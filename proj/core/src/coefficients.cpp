#include "morava/coefficients.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace morava {

std::int64_t powi(std::int64_t b, std::int64_t e) {
  internalCheck(e >= 0 && b > 0, "powi: bad arguments");
  std::int64_t r = 1;
  for (std::int64_t i = 0; i < e; ++i) {
    internalCheck(r <= std::numeric_limits<std::int64_t>::max() / b, "powi: overflow");
    r *= b;
  }
  return r;
}

bool isPrime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

PrimeContext::PrimeContext(std::int64_t p_, int n_) : p(p_), n(n_) {
  require(isPrime(p), "p must be prime, got " + std::to_string(p));
  require(n >= 1, "height n must be >= 1, got " + std::to_string(n));
  powi(p, 2 * static_cast<std::int64_t>(n));  // overflow guard for q^2 uses
}

std::int64_t fpNormalize(std::int64_t a, std::int64_t p) {
  a %= p;
  return a < 0 ? a + p : a;
}

std::int64_t fpInverse(std::int64_t a, std::int64_t p) {
  a = fpNormalize(a, p);
  require(a != 0, "division by zero in F_p");
  // extended Euclid
  std::int64_t r0 = p, r1 = a, s0 = 0, s1 = 1;
  while (r1 != 0) {
    std::int64_t q = r0 / r1;
    std::int64_t r2 = r0 - q * r1;
    std::int64_t s2 = s0 - q * s1;
    r0 = r1; r1 = r2;
    s0 = s1; s1 = s2;
  }
  internalCheck(r0 == 1, "fpInverse: modulus not prime");
  return fpNormalize(s0, p);
}

GradedScalar GradedScalar::make(const PrimeContext& ctx, std::int64_t c, std::int64_t vexp) {
  GradedScalar s(ctx);
  c = fpNormalize(c, ctx.p);
  if (c != 0) s.terms_.push_back({vexp, c});
  return s;
}

GradedScalar::Term GradedScalar::monomial() const {
  require(isMonomial(), "scalar is not a nonzero monomial");
  return terms_[0];
}

PrimeContext GradedScalar::context() const {
  internalCheck(hasContext(), "scalar has no context");
  return PrimeContext(p_, n_);
}

void GradedScalar::checkCompatible(const GradedScalar& o) const {
  if (p_ != 0 && o.p_ != 0)
    require(p_ == o.p_ && n_ == o.n_, "mismatched coefficient contexts");
}

void GradedScalar::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.vexp < b.vexp; });
  std::vector<Term> out;
  for (const Term& t : terms_) {
    if (!out.empty() && out.back().vexp == t.vexp) {
      out.back().c = fpNormalize(out.back().c + t.c, p_);
    } else {
      out.push_back({t.vexp, fpNormalize(t.c, p_)});
    }
    if (out.back().c == 0) out.pop_back();
  }
  terms_ = std::move(out);
}

GradedScalar GradedScalar::operator+(const GradedScalar& o) const {
  checkCompatible(o);
  if (isZero()) return o;
  if (o.isZero()) return *this;
  GradedScalar r = *this;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  r.normalize();
  return r;
}

GradedScalar GradedScalar::operator-(const GradedScalar& o) const { return *this + (-o); }

GradedScalar GradedScalar::operator-() const {
  GradedScalar r = *this;
  for (Term& t : r.terms_) t.c = fpNormalize(-t.c, p_);
  return r;
}

GradedScalar GradedScalar::operator*(const GradedScalar& o) const {
  checkCompatible(o);
  if (isZero()) return *this;
  if (o.isZero()) return o;
  GradedScalar r(PrimeContext(p_, n_));
  r.terms_.reserve(terms_.size() * o.terms_.size());
  for (const Term& a : terms_)
    for (const Term& b : o.terms_)
      r.terms_.push_back({a.vexp + b.vexp, fpNormalize(a.c * b.c, p_)});
  r.normalize();
  return r;
}

bool GradedScalar::operator==(const GradedScalar& o) const {
  if (isZero() && o.isZero()) return true;
  checkCompatible(o);
  return terms_ == o.terms_;
}

void GradedScalar::scaleBy(std::int64_t c, std::int64_t vexp) {
  c = fpNormalize(c, p_);
  if (c == 0) {
    terms_.clear();
    return;
  }
  for (Term& t : terms_) {
    t.vexp += vexp;
    t.c = fpNormalize(t.c * c, p_);
  }
}

GradedScalar GradedScalar::inverse() const {
  Term t = monomial();  // errors on zero / non-monomial
  return make(PrimeContext(p_, n_), fpInverse(t.c, p_), -t.vexp);
}

std::int64_t GradedScalar::evalAtOne() const {
  std::int64_t s = 0;
  for (const Term& t : terms_) s += t.c;
  return p_ == 0 ? 0 : fpNormalize(s, p_);
}

std::string GradedScalar::str() const {
  if (isZero()) return "0";
  std::ostringstream os;
  bool first = true;
  // print high v-powers first for readability
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    if (!first) os << " + ";
    first = false;
    if (it->vexp == 0) {
      os << it->c;
    } else {
      if (it->c != 1) os << it->c << "*";
      os << "v";
      if (it->vexp != 1) os << "^" << it->vexp;
    }
  }
  return os.str();
}

std::int64_t pIntegralReduce(const BigRational& r, std::int64_t p) {
  const BigInt den = boost::multiprecision::denominator(r);
  require(den % p != 0, "non-p-integral value");
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt nm = ((num % p) + p) % p;
  const BigInt dm = ((den % p) + p) % p;
  return fpNormalize(static_cast<std::int64_t>(nm) * fpInverse(static_cast<std::int64_t>(dm), p), p);
}

}  // namespace morava
