#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morava/errors.hpp"

namespace morava {

// Finite abelian p-group, presented as a product of cyclic factors
// Z/p^{k_1} x ... x Z/p^{k_r}.  Factor order is significant (generators are
// indexed by position); the empty list is the trivial group.
struct AbelianPGroup {
  std::int64_t p = 2;
  std::vector<int> exponents;

  AbelianPGroup() = default;
  AbelianPGroup(std::int64_t p_, std::vector<int> exps);

  int rank() const { return static_cast<int>(exponents.size()); }
  std::int64_t order() const;
  std::int64_t factorOrder(int i) const;
  bool operator==(const AbelianPGroup& o) const { return p == o.p && exponents == o.exponents; }
  bool operator!=(const AbelianPGroup& o) const { return !(*this == o); }
  std::string str() const;  // e.g. "Z/4 x Z/2"
};

// Element in coordinates, canonical range 0 <= c_i < p^{k_i}.
using GroupElement = std::vector<std::int64_t>;

GroupElement gpZero(const AbelianPGroup& g);
GroupElement gpAdd(const AbelianPGroup& g, const GroupElement& a, const GroupElement& b);
GroupElement gpNeg(const AbelianPGroup& g, const GroupElement& a);
GroupElement gpScale(const AbelianPGroup& g, std::int64_t m, const GroupElement& a);
std::int64_t gpElementOrder(const AbelianPGroup& g, const GroupElement& a);
// Mixed-radix rank (first coordinate most significant) and its inverse.
std::int64_t gpRank(const AbelianPGroup& g, const GroupElement& a);
GroupElement gpUnrank(const AbelianPGroup& g, std::int64_t r);

// Subgroup of a fixed ambient group, carrying the full (sorted) element list
// and a canonical cyclic basis with decreasing p-power orders.  The basis
// presents the subgroup abstractly as prod Z/p^{a_j}; basis member j has
// element order equal to its invariant-factor order.
struct Subgroup {
  AbelianPGroup ambient;
  std::vector<GroupElement> generators;   // as supplied
  std::vector<std::int64_t> elements;     // sorted element ranks
  std::vector<GroupElement> basis;
  std::vector<std::int64_t> basisOrders;  // p-powers, non-increasing

  std::int64_t order() const { return static_cast<std::int64_t>(elements.size()); }
  bool contains(const GroupElement& e) const;
  bool sameElements(const Subgroup& o) const { return elements == o.elements; }
  // The abstract group prod Z/p^{a_j} presented by the basis.
  AbelianPGroup abstractGroup() const;
  std::string str() const;
};

// Closure of the generators plus canonical basis extraction.
Subgroup subgroupFromGenerators(const AbelianPGroup& g, const std::vector<GroupElement>& gens);
Subgroup subgroupJoin(const Subgroup& a, const Subgroup& b);
Subgroup subgroupIntersection(const Subgroup& a, const Subgroup& b);

// Group homomorphism dom -> cod given by a matrix over Z: column j is the
// image of the j-th generator of dom in cod coordinates.  Construction checks
// order compatibility: p^{k_j} * (column j) = 0 in cod.
struct GroupHom {
  AbelianPGroup domain, codomain;
  std::vector<std::vector<std::int64_t>> matrix;  // [codomain gen][domain gen]

  GroupHom(AbelianPGroup dom, AbelianPGroup cod, std::vector<std::vector<std::int64_t>> m);
  GroupElement apply(const GroupElement& e) const;
};

// Inclusion of the abstract form of a subgroup: abstractGroup() -> ambient,
// sending generator j to basis[j].
GroupHom inclusionHom(const Subgroup& s);

// The three transversality criteria, evaluated independently:
//   productCover:  the product set {h + k} is all of G
//   orderEquation: |H| * |K| = |G| * |H meet K|
//   cosetPairs:    the coset map G -> G/H x G/K hits all |G/H|*|G/K| pairs
// Disagreement between them is an internal error.
struct TransverseCheck {
  bool productCover = false;
  bool orderEquation = false;
  bool cosetPairs = false;
  bool value() const;
};

TransverseCheck isTransverse(const Subgroup& h, const Subgroup& k);

// All subgroups, deduplicated, sorted by (order, element list).  The ambient
// order is capped (default 2^12) to bound the closure walk.
std::vector<Subgroup> enumerateSubgroups(const AbelianPGroup& g, std::int64_t orderCap = 1 << 12);

}  // namespace morava
