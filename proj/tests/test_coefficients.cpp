#include "doctest.h"
#include "morava/coefficients.hpp"

using namespace morava;

TEST_CASE("integer power helper") {
  CHECK(powi(2, 10) == 1024);
  CHECK(powi(3, 0) == 1);
  CHECK(powi(7, 3) == 343);
  CHECK_THROWS_AS(powi(2, 63), InternalError);
  CHECK_THROWS_AS(powi(2, -1), InternalError);
}

TEST_CASE("primality helper") {
  CHECK(isPrime(2));
  CHECK(isPrime(3));
  CHECK(isPrime(13));
  CHECK_FALSE(isPrime(1));
  CHECK_FALSE(isPrime(4));
  CHECK_FALSE(isPrime(91));  // 7 * 13
}

TEST_CASE("prime context validates and derives q") {
  const PrimeContext ctx(3, 2);
  CHECK(ctx.q() == 9);
  CHECK(ctx.vPeriod() == 8);
  CHECK(PrimeContext(2, 1).vPeriod() == 1);
  CHECK_THROWS_AS(PrimeContext(4, 1), InvalidInputError);
  CHECK_THROWS_AS(PrimeContext(2, 0), InvalidInputError);
  CHECK_THROWS_AS(PrimeContext(-3, 1), InvalidInputError);
}

TEST_CASE("prime field representatives") {
  CHECK(fpNormalize(-1, 5) == 4);
  CHECK(fpNormalize(12, 5) == 2);
  CHECK(fpNormalize(0, 7) == 0);
  for (std::int64_t p : {2, 3, 5, 7, 13})
    for (std::int64_t a = 1; a < p; ++a)
      CHECK(fpNormalize(a * fpInverse(a, p), p) == 1);
  CHECK_THROWS(fpInverse(0, 5));
}

TEST_CASE("graded scalar arithmetic in the Laurent coefficient field") {
  const PrimeContext ctx(5, 1);
  const GradedScalar a = GradedScalar::make(ctx, 7, 2);   // 2*v^2
  const GradedScalar b = GradedScalar::make(ctx, 4, -1);  // 4*v^-1

  CHECK(a.monomial().c == 2);
  CHECK(a.monomial().vexp == 2);
  CHECK(GradedScalar::make(ctx, 10, 3).isZero());  // coefficient reduces to 0
  CHECK((a + b - a) == b);
  CHECK((a * b).monomial().c == 3);   // 2*4 = 8 = 3 mod 5
  CHECK((a * b).monomial().vexp == 1);
  CHECK((-a + a).isZero());
  CHECK((a * GradedScalar::one(ctx)) == a);
  CHECK((a * GradedScalar::zero(ctx)).isZero());

  // distributivity on a fixed triple
  const GradedScalar c = GradedScalar::make(ctx, 3, 4);
  CHECK(((a + b) * c) == (a * c + b * c));

  // additive normalization merges equal v-powers
  const GradedScalar d = GradedScalar::make(ctx, 1, 2);
  CHECK((a + d).isMonomial());
  CHECK((a + d).monomial() == GradedScalar::Term{2, 3});  // 2*v^2 + v^2 = 3*v^2
}

TEST_CASE("graded scalar cancellation drops terms entirely") {
  const PrimeContext ctx(5, 1);
  const GradedScalar a = GradedScalar::make(ctx, 2, 2);
  const GradedScalar d = GradedScalar::make(ctx, 3, 2);
  CHECK((a + d).isZero());  // 2+3 = 0 mod 5
}

TEST_CASE("graded scalar inverse and evaluation") {
  const PrimeContext ctx(7, 1);
  const GradedScalar s = GradedScalar::make(ctx, 3, -2);
  CHECK((s.inverse() * s) == GradedScalar::one(ctx));
  CHECK(s.inverse().monomial().vexp == 2);
  CHECK_THROWS(GradedScalar::zero(ctx).inverse());
  const GradedScalar sum = GradedScalar::make(ctx, 1, 0) + GradedScalar::make(ctx, 1, 1);
  CHECK_THROWS(sum.inverse());  // genuine two-term sum has no monomial inverse
  CHECK(sum.evalAtOne() == 2);
  CHECK((GradedScalar::make(ctx, 5, 3) + GradedScalar::make(ctx, 4, 0)).evalAtOne() == 2);
}

TEST_CASE("graded scalar printing") {
  const PrimeContext ctx(5, 1);
  CHECK(GradedScalar::zero(ctx).str() == "0");
  CHECK(GradedScalar::one(ctx).str() == "1");
  CHECK(GradedScalar::make(ctx, 2, -1).str() == "2*v^-1");
  CHECK(GradedScalar::vpow(ctx, 2).str() == "v^2");
  CHECK(GradedScalar::make(ctx, 3, 0).str() == "3");
  CHECK(GradedScalar::make(ctx, 1, 1).str() == "v");
}

TEST_CASE("scalars from different contexts do not mix") {
  const GradedScalar a = GradedScalar::one(PrimeContext(2, 1));
  const GradedScalar b = GradedScalar::one(PrimeContext(3, 1));
  CHECK_THROWS(a + b);
  CHECK_THROWS(a * b);
  // the context-free zero is absorbed by anything
  CHECK((GradedScalar() + a) == a);
}

TEST_CASE("p-integral rational reduction") {
  CHECK(pIntegralReduce(BigRational(1, 3), 2) == 1);   // 3^-1 = 1 mod 2
  CHECK(pIntegralReduce(BigRational(2, 3), 5) == 4);   // 2 * 2 = 4 (3^-1 = 2 mod 5)
  CHECK(pIntegralReduce(BigRational(-1, 1), 5) == 4);
  CHECK(pIntegralReduce(BigRational(0, 1), 7) == 0);
  CHECK_THROWS(pIntegralReduce(BigRational(1, 2), 2));
  CHECK_THROWS(pIntegralReduce(BigRational(7, 25), 5));
}
