#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "morava/abelian.hpp"
#include "morava/coefficients.hpp"

namespace morava {

class CohomologyRing;
using RingPtr = std::shared_ptr<const CohomologyRing>;

// The ring K(n)^*(BA) = K(n)^* [x_1..x_r] / (x_i^{N_i}), N_i = p^{k_i n},
// deg x_i = 2.  Basis: monomials x^alpha, 0 <= alpha_i < N_i, indexed by
// mixed-radix rank (first generator most significant).
class CohomologyRing {
 public:
  CohomologyRing(PrimeContext ctx, AbelianPGroup group, std::int64_t rankCap);

  const PrimeContext& ctx() const { return ctx_; }
  const AbelianPGroup& group() const { return group_; }
  int generators() const { return group_.rank(); }
  std::int64_t nilpotency(int i) const { return nilp_[i]; }
  const std::vector<std::int64_t>& nilpotencies() const { return nilp_; }
  std::int64_t rank() const { return rank_; }
  // Table truncation sufficient for every series evaluation against single
  // generators of this ring: the largest nilpotency order.
  std::int64_t evalTrunc() const { return evalTrunc_; }

  std::int64_t monomialRank(const std::vector<std::int64_t>& expo) const;
  std::vector<std::int64_t> monomialUnrank(std::int64_t r) const;
  // Cohomological degree 2*|alpha| of the monomial with this rank.
  std::int64_t monomialDegree(std::int64_t r) const;
  bool operator==(const CohomologyRing& o) const {
    return ctx_ == o.ctx_ && group_ == o.group_;
  }
  std::string str() const;

 private:
  PrimeContext ctx_;
  AbelianPGroup group_;
  std::vector<std::int64_t> nilp_;
  std::vector<std::int64_t> stride_;
  std::int64_t rank_ = 1;
  std::int64_t evalTrunc_ = 1;
};

// Ring construction with the resource cap applied to the basis rank
// (default 2^12).  Results are cached per (ctx, group).
RingPtr ringOf(const PrimeContext& ctx, const AbelianPGroup& group,
               std::int64_t rankCap = 1 << 12);
// The ring of A x A (generators of the first copy, then of the second).
// Exempt from the user rank cap: it is an auxiliary of an admitted ring.
RingPtr doubledRing(const RingPtr& ring);

// Element of a CohomologyRing: sparse sorted (monomial rank, scalar) terms.
class CohomologyClass {
 public:
  struct Entry {
    std::int64_t mono;
    GradedScalar coeff;
  };

  CohomologyClass() = default;
  explicit CohomologyClass(RingPtr ring) : ring_(std::move(ring)) {}

  static CohomologyClass zero(RingPtr ring) { return CohomologyClass(std::move(ring)); }
  static CohomologyClass one(const RingPtr& ring);
  static CohomologyClass generator(const RingPtr& ring, int i);
  static CohomologyClass monomial(const RingPtr& ring, std::int64_t monoRank,
                                  const GradedScalar& c);

  const RingPtr& ring() const { return ring_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool isZero() const { return entries_.empty(); }
  std::size_t termCount() const { return entries_.size(); }
  GradedScalar coeff(std::int64_t monoRank) const;  // zero if absent
  // Zero constant term, i.e. the class is nilpotent.
  bool isNilpotent() const;
  // Smallest k with (this)^k = 0; cheap bound from monomial degrees.
  std::int64_t nilpotencyIndexBound() const;
  // Homogeneous cohomological degree; errors on mixed degrees.  Zero class
  // reports degree 0.
  std::int64_t degree() const;
  bool isHomogeneous() const;

  CohomologyClass operator+(const CohomologyClass& o) const;
  CohomologyClass operator-(const CohomologyClass& o) const;
  CohomologyClass operator-() const;
  CohomologyClass operator*(const CohomologyClass& o) const;  // cup product
  CohomologyClass scaled(const GradedScalar& s) const;
  CohomologyClass pow(std::int64_t e) const;
  bool operator==(const CohomologyClass& o) const;
  bool operator!=(const CohomologyClass& o) const { return !(*this == o); }

  std::string str() const;

  // Internal: bulk load (entries need not be sorted/combined yet).
  static CohomologyClass fromTerms(RingPtr ring, std::vector<Entry> terms);

 private:
  RingPtr ring_;
  std::vector<Entry> entries_;

  void normalize();
};

// External product ring(A) (x) ring(B) -> ring(A x B) on the concatenated
// generator list (Kunneth isomorphism at a field spectrum).
CohomologyClass externalProduct(const CohomologyClass& a, const CohomologyClass& b);

// Graded ring homomorphism determined by images of the source generators.
// Source: ring(G); target: ring(H).  Images must be nilpotent degree-2
// classes killed by the [p^{k_i}]-series of their source generator.
class RingHom {
 public:
  RingHom(RingPtr source, RingPtr target, std::vector<CohomologyClass> generatorImages);

  const RingPtr& source() const { return source_; }
  const RingPtr& target() const { return target_; }
  const std::vector<CohomologyClass>& generatorImages() const { return genImages_; }

  CohomologyClass apply(const CohomologyClass& a) const;
  // Image of the basis monomial with the given rank (built from power tables
  // precomputed at construction; safe for concurrent readers).
  CohomologyClass applyMonomial(std::int64_t monoRank) const;

 private:
  RingPtr source_, target_;
  std::vector<CohomologyClass> genImages_;
  // powers_[i][e] = genImages_[i]^e for 0 <= e < N_i of the source
  std::vector<std::vector<CohomologyClass>> powers_;
};

// Pullback f^*: ring(codomain of f) -> ring(domain of f) along a group
// homomorphism, via formal sums of m-series of target generators.
// (Defined in the FGL translation unit; declared here with the ring types.)
RingHom pullbackHom(const PrimeContext& ctx, const GroupHom& f, std::int64_t rankCap = 1 << 12);

}  // namespace morava
