#include "doctest.h"

#include <vector>

#include "morava/fgl.hpp"
#include "morava/kring.hpp"

using namespace morava;

TEST_CASE("ring shape: rank, nilpotency, monomial indexing") {
  const PrimeContext ctx(2, 1);
  const RingPtr r = ringOf(ctx, AbelianPGroup(2, {2, 1}));  // Z/4 x Z/2
  CHECK(r->rank() == 8);
  CHECK(r->generators() == 2);
  CHECK(r->nilpotency(0) == 4);
  CHECK(r->nilpotency(1) == 2);
  CHECK(r->evalTrunc() == 4);
  CHECK(r->str() == "K(1)^*(B(Z/4 x Z/2)) at p=2: rank 8");

  for (std::int64_t m = 0; m < r->rank(); ++m) {
    const std::vector<std::int64_t> e = r->monomialUnrank(m);
    CHECK(r->monomialRank(e) == m);
    std::int64_t tot = 0;
    for (std::int64_t ei : e) tot += ei;
    CHECK(r->monomialDegree(m) == 2 * tot);
  }
  // first generator most significant: rank of x1^a x2^b is 2a + b here
  CHECK(r->monomialRank({1, 0}) == 2);
  CHECK(r->monomialRank({0, 1}) == 1);

  // height scales the nilpotency exponent
  const RingPtr r2 = ringOf(PrimeContext(2, 2), AbelianPGroup(2, {2}));
  CHECK(r2->rank() == 16);
  CHECK(r2->nilpotency(0) == 16);

  const RingPtr triv = ringOf(ctx, AbelianPGroup(2, {}));
  CHECK(triv->rank() == 1);
  CHECK(triv->generators() == 0);

  CHECK_THROWS_AS(ringOf(ctx, AbelianPGroup(3, {1})), InvalidInputError);  // prime mismatch
}

TEST_CASE("ring construction respects the rank cap") {
  CHECK_THROWS_AS(ringOf(PrimeContext(2, 1), AbelianPGroup(2, {13})), ResourceCapError);
  const RingPtr r = ringOf(PrimeContext(2, 1), AbelianPGroup(2, {3}));
  CHECK(r->rank() == 8);
  // the cap also applies to cache hits
  CHECK_THROWS_AS(ringOf(PrimeContext(2, 1), AbelianPGroup(2, {3}), 4), ResourceCapError);
}

TEST_CASE("cup product, truncation, powers") {
  const PrimeContext ctx(2, 1);
  const RingPtr r = ringOf(ctx, AbelianPGroup(2, {2}));  // Z/4: x^4 = 0
  const CohomologyClass x = CohomologyClass::generator(r, 0);
  CHECK((x * x) == x.pow(2));
  CHECK(x.pow(3).entries().size() == 1);
  CHECK(x.pow(4).isZero());
  CHECK((x.pow(3) * x.pow(2)).isZero());
  CHECK(x.pow(0) == CohomologyClass::one(r));

  const CohomologyClass f = CohomologyClass::one(r) + x;
  CHECK(f.pow(2) == CohomologyClass::one(r) + x.pow(2));  // char 2: cross terms cancel
  CHECK((f * CohomologyClass::zero(r)).isZero());

  const PrimeContext ctx3(3, 1);
  const RingPtr r3 = ringOf(ctx3, AbelianPGroup(3, {1}));  // Z/3: y^3 = 0
  const CohomologyClass y = CohomologyClass::generator(r3, 0);
  const CohomologyClass g = CohomologyClass::one(r3) + y;
  CHECK(g.pow(2) == CohomologyClass::one(r3) + y.scaled(GradedScalar::make(ctx3, 2, 0)) + y.pow(2));
}

TEST_CASE("nilpotency index bound is sharp enough") {
  const PrimeContext ctx(2, 1);
  const RingPtr r = ringOf(ctx, AbelianPGroup(2, {2, 1}));
  const CohomologyClass x1 = CohomologyClass::generator(r, 0);
  const CohomologyClass x2 = CohomologyClass::generator(r, 1);
  for (const CohomologyClass& f : {x1, x2, x1 + x2, x1.pow(2) + x2}) {
    CHECK(f.isNilpotent());
    const std::int64_t b = f.nilpotencyIndexBound();
    CHECK(f.pow(b).isZero());
  }
  CHECK_FALSE((CohomologyClass::one(r) + x1).isNilpotent());
}

TEST_CASE("degree and homogeneity account for the v-grading") {
  const PrimeContext ctx(2, 1);  // deg v = -2
  const RingPtr r = ringOf(ctx, AbelianPGroup(2, {2}));
  const CohomologyClass x = CohomologyClass::generator(r, 0);
  CHECK(x.degree() == 2);
  CHECK(x.isHomogeneous());
  const CohomologyClass f = x + x.pow(2).scaled(GradedScalar::vpow(ctx, 1));
  CHECK(f.isHomogeneous());  // 4 - 2 = 2 matches deg x
  CHECK(f.degree() == 2);
  const CohomologyClass g = x + x.pow(2);
  CHECK_FALSE(g.isHomogeneous());
  CHECK_THROWS_AS(g.degree(), InvalidInputError);
  CHECK(CohomologyClass::zero(r).degree() == 0);
  CHECK(CohomologyClass::one(r).degree() == 0);

  // degree is additive under cup product (f * h = v x^3, nonzero in Z/4)
  const CohomologyClass h = x.pow(2).scaled(GradedScalar::vpow(ctx, 1));
  CHECK_FALSE((f * h).isZero());
  CHECK((f * h).degree() == f.degree() + h.degree());
}

TEST_CASE("class printing") {
  const PrimeContext ctx(2, 1);
  const RingPtr r = ringOf(ctx, AbelianPGroup(2, {2, 1}));
  CHECK(CohomologyClass::zero(r).str() == "0");
  CHECK(CohomologyClass::one(r).str() == "1");
  const CohomologyClass x1 = CohomologyClass::generator(r, 0);
  const CohomologyClass x2 = CohomologyClass::generator(r, 1);
  CHECK(x1.str() == "x1");
  CHECK((x1 * x2).str() == "x1*x2");
  CHECK(x1.pow(2).scaled(GradedScalar::vpow(ctx, 1)).str() == "v*x1^2");
}

TEST_CASE("external product concatenates generator lists") {
  const PrimeContext ctx(2, 1);
  const RingPtr ra = ringOf(ctx, AbelianPGroup(2, {2}));
  const RingPtr rb = ringOf(ctx, AbelianPGroup(2, {1}));
  const CohomologyClass a = CohomologyClass::generator(ra, 0);
  const CohomologyClass b = CohomologyClass::generator(rb, 0);
  const CohomologyClass ab = externalProduct(a, b);
  const RingPtr rab = ab.ring();
  CHECK(rab->group() == AbelianPGroup(2, {2, 1}));
  CHECK(ab == CohomologyClass::generator(rab, 0) * CohomologyClass::generator(rab, 1));
  // bilinearity on a sum
  const CohomologyClass s = externalProduct(a + a.pow(2), b);
  CHECK(s == externalProduct(a, b) + externalProduct(a.pow(2), b));
  CHECK(externalProduct(CohomologyClass::one(ra), CohomologyClass::one(rb)) ==
        CohomologyClass::one(rab));
}

TEST_CASE("doubled ring is the ring of the square group") {
  const PrimeContext ctx(3, 1);
  const RingPtr r = ringOf(ctx, AbelianPGroup(3, {2}));
  const RingPtr rr = doubledRing(r);
  CHECK(rr->group() == AbelianPGroup(3, {2, 2}));
  CHECK(rr->rank() == r->rank() * r->rank());
}

TEST_CASE("ring homomorphisms from generator images") {
  const PrimeContext ctx(2, 1);
  const RingPtr r = ringOf(ctx, AbelianPGroup(2, {2, 1}));
  const CohomologyClass x1 = CohomologyClass::generator(r, 0);
  const CohomologyClass x2 = CohomologyClass::generator(r, 1);

  const RingHom id(r, r, {x1, x2});
  const CohomologyClass f = x1 + x1.pow(2) * x2;
  CHECK(id.apply(f) == f);
  for (std::int64_t m = 0; m < r->rank(); ++m)
    CHECK(id.applyMonomial(m) == CohomologyClass::monomial(r, m, GradedScalar::one(ctx)));

  // x1 -> x1, x2 -> v*x1^2 (a degree-2 nilpotent image)
  const CohomologyClass vx1sq = x1.pow(2).scaled(GradedScalar::vpow(ctx, 1));
  const RingHom h(r, r, {x1, vx1sq});
  CHECK(h.apply(x2) == vx1sq);
  CHECK(h.apply(x1 * x2) == x1.pow(3).scaled(GradedScalar::vpow(ctx, 1)));
  CHECK(h.apply(f) == x1);  // the x1^2*x2 term lands on v*x1^4 = 0

  // applyMonomial agrees with apply on every basis monomial
  for (std::int64_t m = 0; m < r->rank(); ++m)
    CHECK(h.applyMonomial(m) ==
          h.apply(CohomologyClass::monomial(r, m, GradedScalar::one(ctx))));

  // images must be homogeneous of degree 2 ...
  CHECK_THROWS_AS(RingHom(r, r, {x1, x1.pow(2)}), InvalidInputError);
  // ... and nilpotent
  CHECK_THROWS_AS(RingHom(r, r, {x1, CohomologyClass::one(r)}), InvalidInputError);
  // ... and one per source generator
  CHECK_THROWS_AS(RingHom(r, r, {x1}), InvalidInputError);
}

TEST_CASE("pullback along the subgroup inclusion restricts the generator") {
  const PrimeContext ctx(2, 1);
  const AbelianPGroup c2(2, {1}), c4(2, {2});
  // 1 -> 2 embeds Z/2 as the index-2 subgroup of Z/4; the standard character
  // of Z/4 restricts to the standard character of the subgroup, so x -> x'
  const GroupHom incl(c2, c4, {{2}});
  const RingHom pull = pullbackHom(ctx, incl);
  CHECK(pull.source() == ringOf(ctx, c4));
  CHECK(pull.target() == ringOf(ctx, c2));
  const CohomologyClass x = CohomologyClass::generator(ringOf(ctx, c4), 0);
  CHECK(pull.apply(x) == CohomologyClass::generator(ringOf(ctx, c2), 0));
  CHECK(pull.apply(CohomologyClass::one(ringOf(ctx, c4))) ==
        CohomologyClass::one(ringOf(ctx, c2)));

  // the trivial homomorphism does kill the generator
  const RingHom pullTriv = pullbackHom(ctx, GroupHom(c2, c4, {{0}}));
  CHECK(pullTriv.apply(x).isZero());
  CHECK(pullTriv.apply(CohomologyClass::one(ringOf(ctx, c4))) ==
        CohomologyClass::one(ringOf(ctx, c2)));
}

TEST_CASE("pullback along the reduction is injective on the small ring") {
  const PrimeContext ctx(2, 1);
  const AbelianPGroup c2(2, {1}), c4(2, {2});
  const GroupHom red(c4, c2, {{1}});
  const RingHom pull = pullbackHom(ctx, red);
  const RingPtr r4 = ringOf(ctx, c4);
  // the standard character of Z/2 pulls back to the square of the standard
  // character of Z/4, so f^*(y) = [2](x) = v x^2 — nonzero in the rank-4 ring
  const CohomologyClass y = CohomologyClass::generator(ringOf(ctx, c2), 0);
  const CohomologyClass x = CohomologyClass::generator(r4, 0);
  CHECK(pull.apply(y) == x.pow(2).scaled(GradedScalar::vpow(ctx, 1)));
  CHECK_FALSE(pull.apply(y).isZero());
}

TEST_CASE("pullbacks compose contravariantly for automorphisms of Z/9") {
  const PrimeContext ctx(3, 1);
  const AbelianPGroup c9(3, {2});
  const GroupHom f(c9, c9, {{2}});
  const GroupHom g(c9, c9, {{5}});
  // g o f sends 1 to 10 = 1, i.e. the identity, so f^* (g^* x) = x
  const RingHom pf = pullbackHom(ctx, f);
  const RingHom pg = pullbackHom(ctx, g);
  const CohomologyClass x = CohomologyClass::generator(ringOf(ctx, c9), 0);
  const CohomologyClass gx = pg.apply(x);
  CHECK_FALSE(gx == x);  // a nontrivial automorphism moves x
  CHECK(pf.apply(gx) == x);
}

TEST_CASE("pullback respects products and the m-series relation") {
  const PrimeContext ctx(2, 1);
  const AbelianPGroup g(2, {2, 1}), c4(2, {2});
  // project to the first factor
  const GroupHom proj(g, c4, {{1, 0}});
  const RingHom pull = pullbackHom(ctx, proj);
  const RingPtr rg = ringOf(ctx, g);
  const CohomologyClass x = CohomologyClass::generator(ringOf(ctx, c4), 0);
  CHECK(pull.apply(x) == CohomologyClass::generator(rg, 0));
  CHECK(pull.apply(x.pow(2)) == pull.apply(x) * pull.apply(x));
  CHECK(pull.apply(x.pow(2) + x.pow(3)) == pull.apply(x.pow(2)) + pull.apply(x.pow(3)));
}
