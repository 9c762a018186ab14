#include "morava/duality.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace morava {

HomologyClass HomologyClass::basis(const RingPtr& ring, std::int64_t monoRank) {
  return term(ring, monoRank, GradedScalar::one(ring->ctx()));
}

HomologyClass HomologyClass::term(const RingPtr& ring, std::int64_t monoRank,
                                  const GradedScalar& c) {
  HomologyClass out(ring);
  internalCheck(monoRank >= 0 && monoRank < ring->rank(), "basis rank out of range");
  if (!c.isZero()) out.entries_.push_back({monoRank, c});
  return out;
}

HomologyClass HomologyClass::fromTerms(RingPtr ring, std::vector<Entry> terms) {
  HomologyClass out(std::move(ring));
  std::sort(terms.begin(), terms.end(),
            [](const Entry& a, const Entry& b) { return a.mono < b.mono; });
  for (Entry& e : terms) {
    if (!out.entries_.empty() && out.entries_.back().mono == e.mono) {
      out.entries_.back().coeff += e.coeff;
      if (out.entries_.back().coeff.isZero()) out.entries_.pop_back();
    } else if (!e.coeff.isZero()) {
      out.entries_.push_back(std::move(e));
    }
  }
  return out;
}

GradedScalar HomologyClass::coeff(std::int64_t monoRank) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), monoRank,
                             [](const Entry& e, std::int64_t r) { return e.mono < r; });
  if (it != entries_.end() && it->mono == monoRank) return it->coeff;
  return ring_ ? GradedScalar::zero(ring_->ctx()) : GradedScalar();
}

std::int64_t HomologyClass::degree() const {
  if (isZero()) return 0;
  std::int64_t d = 0;
  bool first = true;
  for (const Entry& e : entries_) {
    const std::int64_t base = ring_->monomialDegree(e.mono);
    for (const GradedScalar::Term& t : e.coeff.terms()) {
      const std::int64_t deg = base + 2 * ring_->ctx().vPeriod() * t.vexp;
      if (first) {
        d = deg;
        first = false;
      } else {
        require(d == deg, "homology class is not homogeneous");
      }
    }
  }
  return d;
}

static void checkSameRingH(const HomologyClass& a, const HomologyClass& b) {
  if (!a.ring() || !b.ring()) return;
  require(*a.ring() == *b.ring(), "operands live over different groups");
}

HomologyClass HomologyClass::operator+(const HomologyClass& o) const {
  checkSameRingH(*this, o);
  if (isZero()) return o;
  if (o.isZero()) return *this;
  std::vector<Entry> merged = entries_;
  merged.insert(merged.end(), o.entries_.begin(), o.entries_.end());
  return fromTerms(ring_, std::move(merged));
}

HomologyClass HomologyClass::operator-() const {
  HomologyClass r = *this;
  for (Entry& e : r.entries_) e.coeff = -e.coeff;
  return r;
}

HomologyClass HomologyClass::operator-(const HomologyClass& o) const { return *this + (-o); }

HomologyClass HomologyClass::scaled(const GradedScalar& s) const {
  if (s.isZero()) return zero(ring_);
  HomologyClass r = *this;
  std::vector<Entry> terms;
  for (Entry& e : r.entries_) {
    e.coeff *= s;
    if (!e.coeff.isZero()) terms.push_back(std::move(e));
  }
  r.entries_ = std::move(terms);
  return r;
}

bool HomologyClass::operator==(const HomologyClass& o) const {
  checkSameRingH(*this, o);
  if (entries_.size() != o.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].mono != o.entries_[i].mono || entries_[i].coeff != o.entries_[i].coeff)
      return false;
  return true;
}

std::string HomologyClass::str() const {
  if (isZero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const Entry& e : entries_) {
    if (!first) os << " + ";
    first = false;
    const auto expo = ring_->monomialUnrank(e.mono);
    std::ostringstream basis;
    basis << "b[";
    for (std::size_t i = 0; i < expo.size(); ++i) {
      if (i) basis << ",";
      basis << expo[i];
    }
    basis << "]";
    const bool scalarIsOne = e.coeff.isMonomial() && e.coeff.monomial().c == 1 &&
                             e.coeff.monomial().vexp == 0;
    const bool needsParens = e.coeff.terms().size() > 1;
    if (scalarIsOne) {
      os << basis.str();
    } else {
      os << (needsParens ? "(" : "") << e.coeff.str() << (needsParens ? ")" : "") << "*"
         << basis.str();
    }
  }
  return os.str();
}

PairingMatrix::PairingMatrix(RingPtr ring, std::vector<std::int64_t> fpEntries,
                             std::vector<std::int64_t> fpInverse)
    : ring_(std::move(ring)), fp_(std::move(fpEntries)), fpInv_(std::move(fpInverse)) {
  const std::size_t want = static_cast<std::size_t>(ring_->rank()) *
                           static_cast<std::size_t>(ring_->rank());
  internalCheck(fp_.size() == want && fpInv_.size() == want, "pairing matrix shape mismatch");
}

std::int64_t PairingMatrix::fpEntry(std::int64_t a, std::int64_t b) const {
  internalCheck(a >= 0 && a < rank() && b >= 0 && b < rank(), "pairing index out of range");
  return fp_[static_cast<std::size_t>(a * rank() + b)];
}

GradedScalar PairingMatrix::graded(std::int64_t c, std::int64_t a, std::int64_t b,
                                   bool inverse) const {
  if (c == 0) return GradedScalar::zero(ring_->ctx());
  const std::int64_t totalDeg = (ring_->monomialDegree(a) + ring_->monomialDegree(b)) / 2;
  const std::int64_t period = ring_->ctx().vPeriod();
  internalCheck(totalDeg % period == 0, "pairing entry violates homogeneity");
  const std::int64_t e = totalDeg / period;
  return GradedScalar::make(ring_->ctx(), c, inverse ? -e : e);
}

GradedScalar PairingMatrix::entry(std::int64_t a, std::int64_t b) const {
  return graded(fpEntry(a, b), a, b, false);
}

GradedScalar PairingMatrix::inverseEntry(std::int64_t a, std::int64_t b) const {
  internalCheck(a >= 0 && a < rank() && b >= 0 && b < rank(), "pairing index out of range");
  return graded(fpInv_[static_cast<std::size_t>(a * rank() + b)], a, b, true);
}

GradedScalar DualityData::transferCoeff(std::int64_t a, std::int64_t b) const {
  return transferUnit.coeff(a * ring->rank() + b);
}

namespace {

// Gauss-Jordan inverse over F_p; internal error if singular (nondegeneracy of
// the pairing is one of the identities this library is built to witness, so a
// singular matrix means the transfer construction broke).
std::vector<std::int64_t> fpMatrixInverse(std::vector<std::int64_t> m, std::int64_t rank,
                                          std::int64_t p) {
  std::vector<std::int64_t> inv(static_cast<std::size_t>(rank * rank), 0);
  for (std::int64_t i = 0; i < rank; ++i) inv[static_cast<std::size_t>(i * rank + i)] = 1;
  auto M = [&m, rank](std::int64_t r, std::int64_t c) -> std::int64_t& {
    return m[static_cast<std::size_t>(r * rank + c)];
  };
  auto I = [&inv, rank](std::int64_t r, std::int64_t c) -> std::int64_t& {
    return inv[static_cast<std::size_t>(r * rank + c)];
  };
  for (std::int64_t col = 0; col < rank; ++col) {
    std::int64_t piv = -1;
    for (std::int64_t r = col; r < rank; ++r)
      if (M(r, col) % p != 0) {
        piv = r;
        break;
      }
    internalCheck(piv >= 0, "duality pairing is degenerate");
    if (piv != col)
      for (std::int64_t c = 0; c < rank; ++c) {
        std::swap(M(piv, c), M(col, c));
        std::swap(I(piv, c), I(col, c));
      }
    const std::int64_t scale = fpInverse(M(col, col), p);
    for (std::int64_t c = 0; c < rank; ++c) {
      M(col, c) = fpNormalize(M(col, c) * scale, p);
      I(col, c) = fpNormalize(I(col, c) * scale, p);
    }
    for (std::int64_t r = 0; r < rank; ++r) {
      if (r == col) continue;
      const std::int64_t f = fpNormalize(M(r, col), p);
      if (f == 0) continue;
      for (std::int64_t c = 0; c < rank; ++c) {
        M(r, c) = fpNormalize(M(r, c) - f * M(col, c), p);
        I(r, c) = fpNormalize(I(r, c) - f * I(col, c), p);
      }
    }
  }
  return inv;
}

std::mutex g_dualCacheMutex;
std::map<std::tuple<std::int64_t, int, std::vector<int>>, DualityPtr> g_dualCache;

}  // namespace

CohomologyClass diagonalTransferUnit(const PrimeContext& ctx, const AbelianPGroup& group,
                                     std::int64_t rankCap, int buildThreads) {
  RingPtr ring = ringOf(ctx, group, rankCap);
  RingPtr two = doubledRing(ring);
  const FglPtr table =
      fglTableFor(ctx, std::max<std::int64_t>(2, ring->evalTrunc()), buildThreads);
  const int r = ring->generators();
  CohomologyClass tr = CohomologyClass::one(two);
  for (int i = 0; i < r; ++i) {
    const CohomologyClass x1 = CohomologyClass::generator(two, i);
    const CohomologyClass x2 = CohomologyClass::generator(two, r + i);
    const CohomologyClass d = formalSum(*table, x1, formalNegate(*table, x2));
    tr = tr * pkCoseries(*table, group.exponents[i], d);
  }
  internalCheck(tr.isZero() || tr.degree() == 0, "transfer unit is not degree 0");
  return tr;
}

DualityPtr dualityDataFor(const PrimeContext& ctx, const AbelianPGroup& group,
                          std::int64_t rankCap, int buildThreads) {
  // validate before touching the cache: the key assumes group.p == ctx.p, and a
  // mismatched lookup must not alias another group's data
  require(ctx.p == group.p, "group prime does not match coefficient prime");
  const auto key = std::make_tuple(ctx.p, ctx.n, group.exponents);
  {
    std::lock_guard<std::mutex> lock(g_dualCacheMutex);
    auto it = g_dualCache.find(key);
    if (it != g_dualCache.end()) {
      if (it->second->ring->rank() > rankCap)
        failCap("ring rank " + std::to_string(it->second->ring->rank()) + " exceeds cap " +
                std::to_string(rankCap));
      return it->second;
    }
  }

  auto data = std::make_shared<DualityData>();
  data->ring = ringOf(ctx, group, rankCap);
  data->ringTwo = doubledRing(data->ring);
  data->table =
      fglTableFor(ctx, std::max<std::int64_t>(2, data->ring->evalTrunc()), buildThreads);
  data->transferUnit = diagonalTransferUnit(ctx, group, rankCap, buildThreads);

  const std::int64_t rank = data->ring->rank();
  std::vector<std::int64_t> fp(static_cast<std::size_t>(rank * rank), 0);
  const std::int64_t period = ctx.vPeriod();
  for (const auto& e : data->transferUnit.entries()) {
    const std::int64_t a = e.mono / rank, b = e.mono % rank;
    // homogeneity pins each transfer coefficient to a single v-power
    internalCheck(e.coeff.isMonomial(), "transfer coefficient is not a monomial scalar");
    const auto t = e.coeff.monomial();
    const std::int64_t totalDeg =
        (data->ring->monomialDegree(a) + data->ring->monomialDegree(b)) / 2;
    internalCheck(totalDeg == t.vexp * period, "transfer coefficient off its degree line");
    fp[static_cast<std::size_t>(a * rank + b)] = t.c;
  }
  for (std::int64_t a = 0; a < rank; ++a)
    for (std::int64_t b = 0; b < a; ++b)
      internalCheck(fp[static_cast<std::size_t>(a * rank + b)] ==
                        fp[static_cast<std::size_t>(b * rank + a)],
                    "pairing is not symmetric");

  std::vector<std::int64_t> inv = fpMatrixInverse(fp, rank, ctx.p);
  // the graded inverse must respect the degree lines: entries off them vanish
  for (std::int64_t a = 0; a < rank; ++a)
    for (std::int64_t b = 0; b < rank; ++b) {
      if (inv[static_cast<std::size_t>(a * rank + b)] == 0) continue;
      const std::int64_t totalDeg =
          (data->ring->monomialDegree(a) + data->ring->monomialDegree(b)) / 2;
      internalCheck(totalDeg % period == 0, "pairing inverse violates homogeneity");
    }
  data->pairing = std::make_shared<PairingMatrix>(data->ring, std::move(fp), std::move(inv));
  data->fundamentalClass = lambdaInvert(*data, CohomologyClass::one(data->ring));
  internalCheck(data->fundamentalClass.degree() == 0, "fundamental class is not degree 0");

  std::lock_guard<std::mutex> lock(g_dualCacheMutex);
  auto [it, _] = g_dualCache.emplace(key, std::move(data));
  return it->second;
}

CohomologyClass diagonalTransferPullback(const DualityData& dual, std::int64_t gammaRank) {
  const CohomologyClass mono = CohomologyClass::monomial(
      dual.ringTwo, gammaRank * dual.ring->rank(), GradedScalar::one(dual.ring->ctx()));
  return mono * dual.transferUnit;
}

CohomologyClass lambdaApply(const DualityData& dual, const HomologyClass& a) {
  if (a.isZero()) return CohomologyClass::zero(dual.ring);
  require(*a.ring() == *dual.ring, "class does not live over this group");
  const std::int64_t rank = dual.ring->rank();
  std::vector<CohomologyClass::Entry> terms;
  for (const auto& e : a.entries())
    for (std::int64_t b = 0; b < rank; ++b) {
      const GradedScalar m = dual.pairing->entry(e.mono, b);
      if (m.isZero()) continue;
      terms.push_back({b, e.coeff * m});
    }
  return CohomologyClass::fromTerms(dual.ring, std::move(terms));
}

HomologyClass lambdaInvert(const DualityData& dual, const CohomologyClass& xi) {
  if (xi.isZero()) return HomologyClass::zero(dual.ring);
  require(*xi.ring() == *dual.ring, "class does not live over this group");
  const std::int64_t rank = dual.ring->rank();
  std::vector<HomologyClass::Entry> terms;
  for (const auto& e : xi.entries())
    for (std::int64_t a = 0; a < rank; ++a) {
      const GradedScalar m = dual.pairing->inverseEntry(e.mono, a);
      if (m.isZero()) continue;
      terms.push_back({a, e.coeff * m});
    }
  HomologyClass out = HomologyClass::fromTerms(dual.ring, std::move(terms));
  internalCheck(lambdaApply(dual, out) == xi, "lambda inverse failed to invert");
  return out;
}

HomologyClass fundamentalClass(const DualityData& dual) { return dual.fundamentalClass; }

HomologyClass capProduct(const DualityData& dual, const HomologyClass& a,
                         const HomologyClass& b) {
  if (a.isZero() || b.isZero()) return HomologyClass::zero(dual.ring);
  require(*a.ring() == *dual.ring && *b.ring() == *dual.ring,
          "cap operands do not live over this group");
  const CohomologyRing& R = *dual.ring;
  const std::int64_t rank = R.rank();
  const int r = R.generators();
  // unranked support of a, reused across transfer entries
  std::vector<std::pair<std::vector<std::int64_t>, const HomologyClass::Entry*>> aSupp;
  for (const auto& e : a.entries()) aSupp.push_back({R.monomialUnrank(e.mono), &e});
  std::vector<HomologyClass::Entry> acc;
  std::vector<std::int64_t> gamma(r);
  for (const auto& te : dual.transferUnit.entries()) {
    const std::int64_t delta = te.mono / rank, beta = te.mono % rank;
    const GradedScalar cb = b.coeff(beta);
    if (cb.isZero()) continue;
    const auto dexp = R.monomialUnrank(delta);
    const GradedScalar tb = te.coeff * cb;
    for (const auto& [aexp, ae] : aSupp) {
      bool ok = true;
      for (int i = 0; i < r; ++i) {
        gamma[i] = aexp[i] - dexp[i];
        if (gamma[i] < 0) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      acc.push_back({R.monomialRank(gamma), ae->coeff * tb});
    }
  }
  return HomologyClass::fromTerms(dual.ring, std::move(acc));
}

HomologyClass capProductViaLambda(const DualityData& dual, const HomologyClass& a,
                                  const HomologyClass& b) {
  return lambdaInvert(dual, lambdaApply(dual, a) * lambdaApply(dual, b));
}

HomologyClass pushforward(const PrimeContext& ctx, const GroupHom& f, const HomologyClass& a,
                          std::int64_t rankCap) {
  const RingHom pull = pullbackHom(ctx, f, rankCap);
  // pull: ring(codomain) -> ring(domain); transpose it on dual bases
  require(a.ring() && *a.ring() == *pull.target(), "class does not live over the hom domain");
  const std::int64_t rankG = pull.source()->rank();
  std::vector<HomologyClass::Entry> terms;
  for (std::int64_t g = 0; g < rankG; ++g) {
    const CohomologyClass img = pull.applyMonomial(g);
    GradedScalar c = GradedScalar::zero(ctx);
    for (const auto& e : a.entries()) c += img.coeff(e.mono) * e.coeff;
    if (!c.isZero()) terms.push_back({g, c});
  }
  return HomologyClass::fromTerms(pull.source(), std::move(terms));
}

HomologyClass homologyTransfer(const PrimeContext& ctx, const GroupHom& f,
                               const HomologyClass& a, std::int64_t rankCap) {
  const DualityPtr dualG = dualityDataFor(ctx, f.codomain, rankCap);
  const DualityPtr dualH = dualityDataFor(ctx, f.domain, rankCap);
  require(a.ring() && *a.ring() == *dualG->ring, "class does not live over the hom codomain");
  const RingHom pull = pullbackHom(ctx, f, rankCap);
  return lambdaInvert(*dualH, pull.apply(lambdaApply(*dualG, a)));
}

HomologyClass bhClass(const PrimeContext& ctx, const Subgroup& h, std::int64_t rankCap) {
  const AbelianPGroup hAbs = h.abstractGroup();
  const DualityPtr dualH = dualityDataFor(ctx, hAbs, rankCap);
  return pushforward(ctx, inclusionHom(h), dualH->fundamentalClass, rankCap);
}

GradedScalar integrate(const DualityData& dual, const CohomologyClass& xi) {
  if (xi.isZero()) return GradedScalar::zero(dual.ring->ctx());
  require(*xi.ring() == *dual.ring, "class does not live over this group");
  GradedScalar out = GradedScalar::zero(dual.ring->ctx());
  for (const auto& e : xi.entries()) out += e.coeff * dual.fundamentalClass.coeff(e.mono);
  return out;
}

TransverseFormulaReport verifyTransverseFormula(const PrimeContext& ctx, const Subgroup& h,
                                                const Subgroup& k, std::int64_t rankCap) {
  require(h.ambient == k.ambient, "subgroups live in different ambient groups");
  TransverseFormulaReport rep;
  rep.h = h;
  rep.k = k;
  rep.meet = subgroupIntersection(h, k);
  rep.transverse = isTransverse(h, k).value();
  const DualityPtr dual = dualityDataFor(ctx, h.ambient, rankCap);
  rep.bhH = bhClass(ctx, h, rankCap);
  rep.bhK = bhClass(ctx, k, rankCap);
  rep.capResult = capProduct(*dual, rep.bhH, rep.bhK);
  rep.bhMeet = bhClass(ctx, rep.meet, rankCap);
  if (rep.transverse) rep.match = rep.capResult == rep.bhMeet;
  return rep;
}

}  // namespace morava
