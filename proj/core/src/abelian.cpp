#include "morava/abelian.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "morava/coefficients.hpp"

namespace morava {

AbelianPGroup::AbelianPGroup(std::int64_t p_, std::vector<int> exps)
    : p(p_), exponents(std::move(exps)) {
  require(isPrime(p), "p must be prime, got " + std::to_string(p));
  for (int k : exponents)
    require(k >= 1, "cyclic exponents must be >= 1");
  order();  // overflow guard
}

std::int64_t AbelianPGroup::order() const {
  std::int64_t o = 1;
  for (int k : exponents) o *= powi(p, k);
  return o;
}

std::int64_t AbelianPGroup::factorOrder(int i) const {
  internalCheck(i >= 0 && i < rank(), "factorOrder: index out of range");
  return powi(p, exponents[i]);
}

std::string AbelianPGroup::str() const {
  if (exponents.empty()) return "1";
  std::ostringstream os;
  for (int i = 0; i < rank(); ++i) {
    if (i) os << " x ";
    os << "Z/" << factorOrder(i);
  }
  return os.str();
}

static void checkElement(const AbelianPGroup& g, const GroupElement& a) {
  require(static_cast<int>(a.size()) == g.rank(), "element arity does not match group rank");
}

GroupElement gpZero(const AbelianPGroup& g) { return GroupElement(g.rank(), 0); }

GroupElement gpAdd(const AbelianPGroup& g, const GroupElement& a, const GroupElement& b) {
  checkElement(g, a);
  checkElement(g, b);
  GroupElement r(g.rank());
  for (int i = 0; i < g.rank(); ++i) r[i] = (a[i] + b[i]) % g.factorOrder(i);
  return r;
}

GroupElement gpNeg(const AbelianPGroup& g, const GroupElement& a) {
  checkElement(g, a);
  GroupElement r(g.rank());
  for (int i = 0; i < g.rank(); ++i) r[i] = (g.factorOrder(i) - a[i]) % g.factorOrder(i);
  return r;
}

GroupElement gpScale(const AbelianPGroup& g, std::int64_t m, const GroupElement& a) {
  checkElement(g, a);
  GroupElement r(g.rank());
  for (int i = 0; i < g.rank(); ++i) {
    const std::int64_t o = g.factorOrder(i);
    r[i] = ((a[i] % o) * (((m % o) + o) % o)) % o;
  }
  return r;
}

std::int64_t gpElementOrder(const AbelianPGroup& g, const GroupElement& a) {
  checkElement(g, a);
  std::int64_t ord = 1;
  GroupElement t = a;
  const GroupElement z = gpZero(g);
  while (t != z) {
    t = gpScale(g, g.p, t);
    ord *= g.p;
  }
  return ord;
}

std::int64_t gpRank(const AbelianPGroup& g, const GroupElement& a) {
  checkElement(g, a);
  std::int64_t r = 0;
  for (int i = 0; i < g.rank(); ++i) {
    const std::int64_t o = g.factorOrder(i);
    require(a[i] >= 0 && a[i] < o, "element coordinate out of range");
    r = r * o + a[i];
  }
  return r;
}

GroupElement gpUnrank(const AbelianPGroup& g, std::int64_t r) {
  GroupElement a(g.rank());
  for (int i = g.rank() - 1; i >= 0; --i) {
    const std::int64_t o = g.factorOrder(i);
    a[i] = r % o;
    r /= o;
  }
  internalCheck(r == 0, "gpUnrank: rank out of range");
  return a;
}

bool Subgroup::contains(const GroupElement& e) const {
  return std::binary_search(elements.begin(), elements.end(), gpRank(ambient, e));
}

AbelianPGroup Subgroup::abstractGroup() const {
  std::vector<int> exps;
  for (std::int64_t o : basisOrders) {
    int k = 0;
    while (o > 1) {
      o /= ambient.p;
      ++k;
    }
    exps.push_back(k);
  }
  return AbelianPGroup(ambient.p, exps);
}

std::string Subgroup::str() const {
  std::ostringstream os;
  os << abstractGroup().str() << " <";
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (j) os << ", ";
    os << "(";
    for (std::size_t i = 0; i < basis[j].size(); ++i) {
      if (i) os << ",";
      os << basis[j][i];
    }
    os << ")";
  }
  os << ">";
  return os.str();
}

// Closure of a generating set, as a sorted rank list.
static std::vector<std::int64_t> closureRanks(const AbelianPGroup& g,
                                              const std::vector<GroupElement>& gens) {
  std::unordered_set<std::int64_t> seen;
  std::vector<GroupElement> frontier;
  seen.insert(gpRank(g, gpZero(g)));
  frontier.push_back(gpZero(g));
  while (!frontier.empty()) {
    GroupElement e = frontier.back();
    frontier.pop_back();
    for (const GroupElement& x : gens) {
      GroupElement s = gpAdd(g, e, x);
      if (seen.insert(gpRank(g, s)).second) frontier.push_back(s);
    }
  }
  std::vector<std::int64_t> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Greedy invariant-factor basis: repeatedly take the lex-least element whose
// order in H / <basis so far> is maximal AND whose element order equals that
// coset order.  Such a representative always exists (basis extension in a
// finite abelian p-group); we check rather than assume.
static void extractBasis(Subgroup& s) {
  const AbelianPGroup& g = s.ambient;
  s.basis.clear();
  s.basisOrders.clear();
  std::vector<std::int64_t> span = closureRanks(g, {});
  auto inSpan = [&span](std::int64_t r) {
    return std::binary_search(span.begin(), span.end(), r);
  };
  auto cosetOrder = [&g, &inSpan](const GroupElement& e) {
    std::int64_t q = 1;
    GroupElement t = e;
    while (!inSpan(gpRank(g, t))) {
      t = gpScale(g, g.p, t);
      q *= g.p;
    }
    return q;
  };
  while (static_cast<std::int64_t>(span.size()) < s.order()) {
    std::int64_t maxOrd = 1;
    for (std::int64_t r : s.elements)
      maxOrd = std::max(maxOrd, cosetOrder(gpUnrank(g, r)));
    internalCheck(maxOrd > 1, "basis extraction found no independent element");
    std::int64_t bestOrd = 0;
    GroupElement best;
    for (std::int64_t r : s.elements) {
      GroupElement e = gpUnrank(g, r);
      if (cosetOrder(e) == maxOrd && gpElementOrder(g, e) == maxOrd) {
        bestOrd = maxOrd;
        best = e;  // elements scanned in rank order, so this is the lex-least
        break;
      }
    }
    internalCheck(bestOrd == maxOrd, "no order-preserving coset representative");
    s.basis.push_back(best);
    s.basisOrders.push_back(bestOrd);
    std::vector<GroupElement> spanGens;
    for (const GroupElement& b : s.basis) spanGens.push_back(b);
    span = closureRanks(g, spanGens);
  }
  // invariant-factor orders must come out non-increasing
  for (std::size_t j = 1; j < s.basisOrders.size(); ++j)
    internalCheck(s.basisOrders[j] <= s.basisOrders[j - 1], "basis orders not sorted");
  std::int64_t prod = 1;
  for (std::int64_t o : s.basisOrders) prod *= o;
  internalCheck(prod == s.order(), "basis does not span the subgroup");
}

Subgroup subgroupFromGenerators(const AbelianPGroup& g, const std::vector<GroupElement>& gens) {
  Subgroup s;
  s.ambient = g;
  for (const GroupElement& e : gens) {
    checkElement(g, e);
    GroupElement c(g.rank());
    for (int i = 0; i < g.rank(); ++i) {
      const std::int64_t o = g.factorOrder(i);
      c[i] = ((e[i] % o) + o) % o;
    }
    s.generators.push_back(c);
  }
  s.elements = closureRanks(g, s.generators);
  extractBasis(s);
  return s;
}

Subgroup subgroupJoin(const Subgroup& a, const Subgroup& b) {
  require(a.ambient == b.ambient, "join of subgroups of different groups");
  std::vector<GroupElement> gens = a.generators;
  gens.insert(gens.end(), b.generators.begin(), b.generators.end());
  return subgroupFromGenerators(a.ambient, gens);
}

Subgroup subgroupIntersection(const Subgroup& a, const Subgroup& b) {
  require(a.ambient == b.ambient, "intersection of subgroups of different groups");
  std::vector<std::int64_t> common;
  std::set_intersection(a.elements.begin(), a.elements.end(),
                        b.elements.begin(), b.elements.end(), std::back_inserter(common));
  std::vector<GroupElement> gens;
  for (std::int64_t r : common) gens.push_back(gpUnrank(a.ambient, r));
  return subgroupFromGenerators(a.ambient, gens);
}

GroupHom::GroupHom(AbelianPGroup dom, AbelianPGroup cod, std::vector<std::vector<std::int64_t>> m)
    : domain(std::move(dom)), codomain(std::move(cod)), matrix(std::move(m)) {
  require(static_cast<int>(matrix.size()) == codomain.rank(),
          "hom matrix row count must equal codomain rank");
  for (const auto& row : matrix)
    require(static_cast<int>(row.size()) == domain.rank(),
            "hom matrix column count must equal domain rank");
  // order compatibility: p^{k_j} * (image of domain generator j) = 0
  for (int j = 0; j < domain.rank(); ++j) {
    GroupElement img(codomain.rank());
    for (int i = 0; i < codomain.rank(); ++i) {
      const std::int64_t o = codomain.factorOrder(i);
      img[i] = ((matrix[i][j] % o) + o) % o;
    }
    require(gpScale(codomain, domain.factorOrder(j), img) == gpZero(codomain),
            "hom matrix violates generator order compatibility");
  }
}

GroupElement GroupHom::apply(const GroupElement& e) const {
  checkElement(domain, e);
  GroupElement r = gpZero(codomain);
  for (int j = 0; j < domain.rank(); ++j) {
    GroupElement img(codomain.rank());
    for (int i = 0; i < codomain.rank(); ++i) {
      const std::int64_t o = codomain.factorOrder(i);
      img[i] = ((matrix[i][j] % o) + o) % o;
    }
    r = gpAdd(codomain, r, gpScale(codomain, e[j], img));
  }
  return r;
}

GroupHom inclusionHom(const Subgroup& s) {
  const AbelianPGroup dom = s.abstractGroup();
  std::vector<std::vector<std::int64_t>> m(s.ambient.rank(),
                                           std::vector<std::int64_t>(dom.rank(), 0));
  for (int j = 0; j < dom.rank(); ++j)
    for (int i = 0; i < s.ambient.rank(); ++i) m[i][j] = s.basis[j][i];
  return GroupHom(dom, s.ambient, m);
}

bool TransverseCheck::value() const {
  internalCheck(productCover == orderEquation && orderEquation == cosetPairs,
                "transversality criteria disagree");
  return productCover;
}

TransverseCheck isTransverse(const Subgroup& h, const Subgroup& k) {
  require(h.ambient == k.ambient, "transversality needs a common ambient group");
  const AbelianPGroup& g = h.ambient;
  const std::int64_t gOrder = g.order();
  TransverseCheck out;

  // (i) product set
  std::unordered_set<std::int64_t> hk;
  for (std::int64_t rh : h.elements) {
    const GroupElement eh = gpUnrank(g, rh);
    for (std::int64_t rk : k.elements)
      hk.insert(gpRank(g, gpAdd(g, eh, gpUnrank(g, rk))));
  }
  out.productCover = static_cast<std::int64_t>(hk.size()) == gOrder;

  // (ii) order equation through the intersection
  const Subgroup meet = subgroupIntersection(h, k);
  out.orderEquation = h.order() * k.order() == gOrder * meet.order();

  // (iii) enumerate the image of G -> G/H x G/K; label each coset by its
  // least member rank
  auto cosetLabel = [&g](const Subgroup& s, std::int64_t r) {
    const GroupElement e = gpUnrank(g, r);
    std::int64_t lab = r;
    for (std::int64_t rs : s.elements)
      lab = std::min(lab, gpRank(g, gpAdd(g, e, gpUnrank(g, rs))));
    return lab;
  };
  std::set<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::int64_t r = 0; r < gOrder; ++r)
    pairs.insert({cosetLabel(h, r), cosetLabel(k, r)});
  out.cosetPairs = static_cast<std::int64_t>(pairs.size()) ==
                   (gOrder / h.order()) * (gOrder / k.order());

  out.value();  // assert agreement
  return out;
}

std::vector<Subgroup> enumerateSubgroups(const AbelianPGroup& g, std::int64_t orderCap) {
  if (g.order() > orderCap)
    failCap("group order " + std::to_string(g.order()) + " exceeds cap " +
            std::to_string(orderCap));
  std::map<std::vector<std::int64_t>, Subgroup> found;
  std::vector<const std::vector<std::int64_t>*> frontier;
  {
    Subgroup triv = subgroupFromGenerators(g, {});
    auto [it, _] = found.emplace(triv.elements, std::move(triv));
    frontier.push_back(&it->first);
  }
  const std::int64_t gOrder = g.order();
  while (!frontier.empty()) {
    const std::vector<std::int64_t> elems = *frontier.back();
    frontier.pop_back();
    const Subgroup& s = found.at(elems);
    std::vector<GroupElement> gens = s.generators;
    for (std::int64_t r = 0; r < gOrder; ++r) {
      if (std::binary_search(elems.begin(), elems.end(), r)) continue;
      gens.push_back(gpUnrank(g, r));
      Subgroup bigger = subgroupFromGenerators(g, gens);
      gens.pop_back();
      if (!found.count(bigger.elements)) {
        auto [it, _] = found.emplace(bigger.elements, std::move(bigger));
        frontier.push_back(&it->first);
      }
    }
  }
  std::vector<Subgroup> out;
  for (auto& [elems, s] : found) out.push_back(std::move(s));
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.elements < b.elements;
  });
  return out;
}

}  // namespace morava
