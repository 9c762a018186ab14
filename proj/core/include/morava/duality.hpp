#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "morava/fgl.hpp"
#include "morava/kring.hpp"

namespace morava {

// Element of K(n)_*(BA): sparse combination of the dual basis {b_alpha},
// b_alpha dual to the monomial x^alpha, with graded scalar coefficients.
// b_alpha sits in homological degree 2|alpha| (and v^e shifts by -deg v).
class HomologyClass {
 public:
  using Entry = CohomologyClass::Entry;  // same (monomial rank, scalar) shape

  HomologyClass() = default;
  explicit HomologyClass(RingPtr ring) : ring_(std::move(ring)) {}

  static HomologyClass zero(RingPtr ring) { return HomologyClass(std::move(ring)); }
  static HomologyClass basis(const RingPtr& ring, std::int64_t monoRank);
  static HomologyClass term(const RingPtr& ring, std::int64_t monoRank, const GradedScalar& c);
  static HomologyClass fromTerms(RingPtr ring, std::vector<Entry> terms);

  const RingPtr& ring() const { return ring_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool isZero() const { return entries_.empty(); }
  GradedScalar coeff(std::int64_t monoRank) const;
  // Homological degree of a homogeneous class (zero class: 0).
  std::int64_t degree() const;

  HomologyClass operator+(const HomologyClass& o) const;
  HomologyClass operator-(const HomologyClass& o) const;
  HomologyClass operator-() const;
  HomologyClass scaled(const GradedScalar& s) const;
  bool operator==(const HomologyClass& o) const;
  bool operator!=(const HomologyClass& o) const { return !(*this == o); }

  std::string str() const;  // e.g. "v^-1*b[3] + b[0]"

 private:
  RingPtr ring_;
  std::vector<Entry> entries_;
};

// The duality pairing <b_alpha, b_beta> on K(n)_*(BA), realized as the
// coefficient matrix of the diagonal transfer unit, together with its
// graded inverse (computed over F_p at v = 1 and regraded by homogeneity).
class PairingMatrix {
 public:
  PairingMatrix(RingPtr ring, std::vector<std::int64_t> fpEntries,
                std::vector<std::int64_t> fpInverse);

  const RingPtr& ring() const { return ring_; }
  std::int64_t rank() const { return ring_->rank(); }
  GradedScalar entry(std::int64_t a, std::int64_t b) const;
  GradedScalar inverseEntry(std::int64_t a, std::int64_t b) const;
  std::int64_t fpEntry(std::int64_t a, std::int64_t b) const;

 private:
  RingPtr ring_;
  std::vector<std::int64_t> fp_, fpInv_;  // rank x rank, row-major, mod-p at v=1

  GradedScalar graded(std::int64_t c, std::int64_t a, std::int64_t b, bool inverse) const;
};

// Everything duality-related for one group, built once and shared:
// the doubled ring, the transfer unit, the pairing and its inverse, and the
// fundamental class.
struct DualityData {
  RingPtr ring;      // ring(A)
  RingPtr ringTwo;   // ring(A x A)
  FglPtr table;      // block sufficient for all single-variable series here
  CohomologyClass transferUnit;          // tr(1) in ring(A x A)
  std::shared_ptr<const PairingMatrix> pairing;
  HomologyClass fundamentalClass;

  // Coefficient of x^a (x) x^b in tr(1).
  GradedScalar transferCoeff(std::int64_t a, std::int64_t b) const;
};

using DualityPtr = std::shared_ptr<const DualityData>;

// Cached per (ctx, group).  rankCap applies to ring(A); ring(A x A) is an
// internal auxiliary and only bounded by rank(A)^2.  buildThreads bounds the
// parallelism of the underlying law-table construction (the result is
// bit-identical for every thread count).
DualityPtr dualityDataFor(const PrimeContext& ctx, const AbelianPGroup& group,
                          std::int64_t rankCap = 1 << 12, int buildThreads = 1);

// tr(1) = prod_i <p^{k_i}>(x_{i,1} -_F x_{i,2}) in ring(A x A).
CohomologyClass diagonalTransferUnit(const PrimeContext& ctx, const AbelianPGroup& group,
                                     std::int64_t rankCap = 1 << 12,
                                     int buildThreads = 1);

// (Delta^!)^*(x^gamma) = (x^gamma (x) 1) * tr(1).
CohomologyClass diagonalTransferPullback(const DualityData& dual, std::int64_t gammaRank);

// lambda(a) = <a, -> as a cohomology class; the inverse map; and the
// fundamental class lambda^{-1}(1).
CohomologyClass lambdaApply(const DualityData& dual, const HomologyClass& a);
HomologyClass lambdaInvert(const DualityData& dual, const CohomologyClass& xi);
HomologyClass fundamentalClass(const DualityData& dual);

// a cap b: transpose of the diagonal transfer pullback,
// (a cap b)_gamma = sum a_alpha b_beta tr_{alpha-gamma, beta}.
HomologyClass capProduct(const DualityData& dual, const HomologyClass& a,
                         const HomologyClass& b);
// Independent route: lambda^{-1}(lambda(a) * lambda(b)).
HomologyClass capProductViaLambda(const DualityData& dual, const HomologyClass& a,
                                  const HomologyClass& b);

// Functoriality along a group homomorphism f: H -> G.
// pushforward: f_* = transpose of the cohomology pullback in dual bases.
HomologyClass pushforward(const PrimeContext& ctx, const GroupHom& f, const HomologyClass& a,
                          std::int64_t rankCap = 1 << 12);
// homology transfer: f^! = lambda_H^{-1} . f^* . lambda_G  (wrong-way map).
HomologyClass homologyTransfer(const PrimeContext& ctx, const GroupHom& f,
                               const HomologyClass& a, std::int64_t rankCap = 1 << 12);

// [BH] = (i_H)_* [BH-bar] for the inclusion of a subgroup.
HomologyClass bhClass(const PrimeContext& ctx, const Subgroup& h, std::int64_t rankCap = 1 << 12);

// <xi, [BA]>: pair a cohomology class against the fundamental class.
GradedScalar integrate(const DualityData& dual, const CohomologyClass& xi);

// One transverse-intersection verification [BH] cap [BK] = [B(H meet K)].
struct TransverseFormulaReport {
  bool transverse = false;
  bool match = false;       // meaningful only when transverse
  Subgroup h, k, meet;
  HomologyClass bhH, bhK, capResult, bhMeet;
};

TransverseFormulaReport verifyTransverseFormula(const PrimeContext& ctx, const Subgroup& h,
                                                const Subgroup& k,
                                                std::int64_t rankCap = 1 << 12);

}  // namespace morava
