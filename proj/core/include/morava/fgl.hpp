#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "morava/coefficients.hpp"
#include "morava/kring.hpp"

namespace morava {

// Truncated power series over Q in one or two variables; dense coefficient
// storage, per-variable truncation T (exponents 0..T-1).
class RationalSeries {
 public:
  RationalSeries(int vars, std::int64_t trunc);

  static RationalSeries variable(int vars, int which, std::int64_t trunc);

  int vars() const { return vars_; }
  std::int64_t trunc() const { return trunc_; }

  const BigRational& at(std::int64_t i) const;
  const BigRational& at(std::int64_t i, std::int64_t j) const;
  void set(std::int64_t i, const BigRational& v);
  void set(std::int64_t i, std::int64_t j, const BigRational& v);

  bool isZero() const;
  RationalSeries operator+(const RationalSeries& o) const;
  RationalSeries operator-(const RationalSeries& o) const;
  RationalSeries operator*(const RationalSeries& o) const;
  RationalSeries pow(std::int64_t e) const;
  // s(g) for univariate s (this) and univariate g with g(0) = 0.
  RationalSeries compose(const RationalSeries& g) const;

  bool operator==(const RationalSeries& o) const;

 private:
  int vars_;
  std::int64_t trunc_;
  std::vector<BigRational> c_;  // univariate: [i]; bivariate: [i*T + j]

  std::size_t idx(std::int64_t i, std::int64_t j) const;
};

// l(x) = sum_{p^{ni} < T} x^{p^{ni}} / p^i  (leading term x).
RationalSeries hondaLogarithm(const PrimeContext& ctx, std::int64_t trunc);

// Compositional inverse g of s (s(g(x)) = x), for univariate s with s(0)=0
// and linear coefficient 1; degree-by-degree refinement, each pass fixes the
// lowest unresolved coefficient through the triangular relation s(g) = x.
RationalSeries seriesCompositionalInverse(const RationalSeries& s);

// The height-n Honda formal group law mod p on the block {i, j < T}:
// F(x,y) = sum a_{ij} v^{e(i,j)} x^i y^j with a_{ij} in F_p and
// e(i,j) = (i+j-1)/(p^n - 1).  Computed from the defining functional
// equation F = x + y + sum_i (x^{q^i} + y^{q^i} - F^{q^i})/p^i in the
// quotient Z_p[x,y]/(x^T, y^T), slice by slice in total degree, carrying
// residues modulo a power of p with a proven per-slice precision schedule
// (tracked and checked, never assumed).  Small truncations are additionally
// cross-checked against the independent exact-rational construction
// exp(l(x) + l(y)).  Construction verifies p-integrality, homogeneity,
// unitality and commutativity.
class FglTable {
 public:
  struct Entry {
    std::int64_t i, j, c;  // c in (0, p)
  };

  // buildThreads parallelizes the internal slice convolutions; the resulting
  // block is bit-identical for every thread count.
  explicit FglTable(const PrimeContext& ctx, std::int64_t trunc, int buildThreads = 1);

  const PrimeContext& ctx() const { return ctx_; }
  std::int64_t trunc() const { return trunc_; }

  // F_p coefficient a_{ij}; i, j must lie in the block.
  std::int64_t coeff(std::int64_t i, std::int64_t j) const;
  // a_{ij} * v^{e(i,j)} as a scalar (zero scalar when a_{ij} = 0).
  GradedScalar gradedCoeff(std::int64_t i, std::int64_t j) const;
  std::int64_t vExponent(std::int64_t i, std::int64_t j) const;

  // All nonzero entries, sorted by (i, j); includes the unital (1,0), (0,1).
  const std::vector<Entry>& nonzero() const { return nonzero_; }
  // Nonzero entries with i >= 1 and j >= 1 (the interaction terms).
  const std::vector<Entry>& interior() const { return interior_; }

 private:
  PrimeContext ctx_;
  std::int64_t trunc_;
  std::vector<std::int64_t> a_;  // dense block, row-major
  std::vector<Entry> nonzero_, interior_;
};

using FglPtr = std::shared_ptr<const FglTable>;

// Process-wide cache keyed by (p, n, trunc).  A cached table with truncation
// >= the request is reused: entries beyond a ring's nilpotency contribute
// nothing to any evaluation, so results are identical either way.
FglPtr fglTableFor(const PrimeContext& ctx, std::int64_t trunc, int buildThreads = 1);

// F(f, g) for nilpotent classes in a common ring.  Exact in the quotient ring
// provided the table block covers the nilpotency indices of both arguments
// (checked; internal error otherwise).
CohomologyClass formalSum(const FglTable& table, const CohomologyClass& f,
                          const CohomologyClass& g);

// The formal inverse iota(f) with F(f, iota(f)) = 0 (verified on return).
// For odd p the law is p-typical and iota(f) = -f; for p = 2 the inverse is
// [2^K - 1](f) for any 2^{Kn} at or above the nilpotency bound of f, since
// the 2^K-series collapses to v^e f^{2^{Kn}} = 0 there.
CohomologyClass formalNegate(const FglTable& table, const CohomologyClass& f);

// [m](f) for any integer m, by binary double-and-add over the formal sum
// (and formal inverse for m < 0); exact because the evaluated law is
// associative on nilpotent classes.
CohomologyClass mSeries(const FglTable& table, std::int64_t m, const CohomologyClass& f);

// <p^k>(t) = v^{(p^{kn}-1)/(p^n-1)} * t^{p^{kn}-1}, the co-series
// [p^k](x)/x of the Honda p^k-series.
CohomologyClass pkCoseries(const FglTable& table, int k, const CohomologyClass& t);

// Associativity F(F(x,y),z) = F(x,F(y,z)) compared on the full trivariate
// block {a,b,c < T}; needs table.trunc() >= 2T-1 because outer powers reach
// total degree 2T-2.
bool fglAssociativityHolds(const FglTable& table, std::int64_t T);

}  // namespace morava
