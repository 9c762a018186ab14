#include "morava/kring.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "morava/fgl.hpp"

namespace morava {

CohomologyRing::CohomologyRing(PrimeContext ctx, AbelianPGroup group, std::int64_t rankCap)
    : ctx_(std::move(ctx)), group_(std::move(group)) {
  require(ctx_.p == group_.p, "group prime does not match coefficient prime");
  for (int i = 0; i < group_.rank(); ++i) {
    const std::int64_t nilp = powi(ctx_.p, static_cast<std::int64_t>(group_.exponents[i]) * ctx_.n);
    nilp_.push_back(nilp);
    evalTrunc_ = std::max(evalTrunc_, nilp);
    internalCheck(rank_ <= (std::int64_t{1} << 56) / nilp, "ring rank overflow");
    rank_ *= nilp;
  }
  if (rank_ > rankCap)
    failCap("ring rank " + std::to_string(rank_) + " exceeds cap " + std::to_string(rankCap));
  stride_.assign(group_.rank(), 1);
  for (int i = group_.rank() - 2; i >= 0; --i) stride_[i] = stride_[i + 1] * nilp_[i + 1];
}

std::int64_t CohomologyRing::monomialRank(const std::vector<std::int64_t>& expo) const {
  internalCheck(static_cast<int>(expo.size()) == generators(), "monomial arity mismatch");
  std::int64_t r = 0;
  for (int i = 0; i < generators(); ++i) {
    internalCheck(expo[i] >= 0 && expo[i] < nilp_[i], "monomial exponent out of range");
    r += expo[i] * stride_[i];
  }
  return r;
}

std::vector<std::int64_t> CohomologyRing::monomialUnrank(std::int64_t r) const {
  internalCheck(r >= 0 && r < rank_, "monomial rank out of range");
  std::vector<std::int64_t> expo(generators());
  for (int i = 0; i < generators(); ++i) {
    expo[i] = r / stride_[i];
    r %= stride_[i];
  }
  return expo;
}

std::int64_t CohomologyRing::monomialDegree(std::int64_t r) const {
  std::int64_t total = 0;
  for (std::int64_t e : monomialUnrank(r)) total += e;
  return 2 * total;
}

std::string CohomologyRing::str() const {
  std::ostringstream os;
  os << "K(" << ctx_.n << ")^*(B(" << group_.str() << ")) at p=" << ctx_.p
     << ": rank " << rank_;
  return os.str();
}

namespace {
std::mutex g_ringCacheMutex;
std::map<std::tuple<std::int64_t, int, std::vector<int>>, RingPtr> g_ringCache;
}  // namespace

RingPtr ringOf(const PrimeContext& ctx, const AbelianPGroup& group, std::int64_t rankCap) {
  // validate before touching the cache: the key assumes group.p == ctx.p, and a
  // mismatched lookup must not alias another group's ring
  require(ctx.p == group.p, "group prime does not match coefficient prime");
  const auto key = std::make_tuple(ctx.p, ctx.n, group.exponents);
  {
    std::lock_guard<std::mutex> lock(g_ringCacheMutex);
    auto it = g_ringCache.find(key);
    if (it != g_ringCache.end()) {
      // still enforce the caller's cap against the cached ring
      if (it->second->rank() > rankCap)
        failCap("ring rank " + std::to_string(it->second->rank()) + " exceeds cap " +
                std::to_string(rankCap));
      return it->second;
    }
  }
  RingPtr made = std::make_shared<CohomologyRing>(ctx, group, rankCap);
  std::lock_guard<std::mutex> lock(g_ringCacheMutex);
  auto [it, _] = g_ringCache.emplace(key, std::move(made));
  return it->second;
}

RingPtr doubledRing(const RingPtr& ring) {
  std::vector<int> exps = ring->group().exponents;
  exps.insert(exps.end(), ring->group().exponents.begin(), ring->group().exponents.end());
  const AbelianPGroup twice(ring->group().p, exps);
  const std::int64_t cap = ring->rank() * ring->rank();
  return ringOf(ring->ctx(), twice, cap);
}

CohomologyClass CohomologyClass::one(const RingPtr& ring) {
  return monomial(ring, 0, GradedScalar::one(ring->ctx()));
}

CohomologyClass CohomologyClass::generator(const RingPtr& ring, int i) {
  require(i >= 0 && i < ring->generators(), "generator index out of range");
  std::vector<std::int64_t> expo(ring->generators(), 0);
  expo[i] = 1;
  return monomial(ring, ring->monomialRank(expo), GradedScalar::one(ring->ctx()));
}

CohomologyClass CohomologyClass::monomial(const RingPtr& ring, std::int64_t monoRank,
                                          const GradedScalar& c) {
  CohomologyClass out(ring);
  internalCheck(monoRank >= 0 && monoRank < ring->rank(), "monomial rank out of range");
  if (!c.isZero()) out.entries_.push_back({monoRank, c});
  return out;
}

GradedScalar CohomologyClass::coeff(std::int64_t monoRank) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), monoRank,
                             [](const Entry& e, std::int64_t r) { return e.mono < r; });
  if (it != entries_.end() && it->mono == monoRank) return it->coeff;
  return ring_ ? GradedScalar::zero(ring_->ctx()) : GradedScalar();
}

bool CohomologyClass::isNilpotent() const { return coeff(0).isZero(); }

std::int64_t CohomologyClass::nilpotencyIndexBound() const {
  if (isZero()) return 1;
  // every term has total degree >= d_min, and the ring is zero above total
  // degree sum(N_i - 1), so powers beyond that ratio vanish
  std::int64_t dmin = ring_->monomialDegree(entries_[0].mono) / 2;
  for (const Entry& e : entries_)
    dmin = std::min(dmin, ring_->monomialDegree(e.mono) / 2);
  require(dmin >= 1, "nilpotency bound needs a nilpotent class");
  std::int64_t top = 0;
  for (int i = 0; i < ring_->generators(); ++i) top += ring_->nilpotency(i) - 1;
  return top / dmin + 1;
}

std::int64_t CohomologyClass::degree() const {
  if (isZero()) return 0;
  std::int64_t d = 0;
  bool first = true;
  for (const Entry& e : entries_) {
    const std::int64_t base = ring_->monomialDegree(e.mono);
    for (const GradedScalar::Term& t : e.coeff.terms()) {
      const std::int64_t deg = base - 2 * ring_->ctx().vPeriod() * t.vexp;
      if (first) {
        d = deg;
        first = false;
      } else {
        require(d == deg, "class is not homogeneous");
      }
    }
  }
  return d;
}

bool CohomologyClass::isHomogeneous() const {
  try {
    degree();
    return true;
  } catch (const InvalidInputError&) {
    return false;
  }
}

void CohomologyClass::normalize() {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.mono < b.mono; });
  std::vector<Entry> out;
  for (Entry& e : entries_) {
    if (!out.empty() && out.back().mono == e.mono) {
      out.back().coeff += e.coeff;
      if (out.back().coeff.isZero()) out.pop_back();
    } else if (!e.coeff.isZero()) {
      out.push_back(std::move(e));
    }
  }
  entries_ = std::move(out);
}

CohomologyClass CohomologyClass::fromTerms(RingPtr ring, std::vector<Entry> terms) {
  CohomologyClass out(std::move(ring));
  out.entries_ = std::move(terms);
  out.normalize();
  return out;
}

static void checkSameRing(const CohomologyClass& a, const CohomologyClass& b) {
  if (!a.ring() || !b.ring()) return;  // zero without ring binds to anything
  require(*a.ring() == *b.ring(), "operands live in different rings");
}

CohomologyClass CohomologyClass::operator+(const CohomologyClass& o) const {
  checkSameRing(*this, o);
  if (isZero()) return o;
  if (o.isZero()) return *this;
  std::vector<Entry> merged = entries_;
  merged.insert(merged.end(), o.entries_.begin(), o.entries_.end());
  return fromTerms(ring_, std::move(merged));
}

CohomologyClass CohomologyClass::operator-() const {
  CohomologyClass r = *this;
  for (Entry& e : r.entries_) e.coeff = -e.coeff;
  return r;
}

CohomologyClass CohomologyClass::operator-(const CohomologyClass& o) const {
  return *this + (-o);
}

namespace {

std::vector<std::vector<std::int64_t>> unrankAll(const CohomologyRing& R,
                                                 const std::vector<CohomologyClass::Entry>& es) {
  std::vector<std::vector<std::int64_t>> out;
  out.reserve(es.size());
  for (const auto& e : es) out.push_back(R.monomialUnrank(e.mono));
  return out;
}

// Every coefficient a single v-power and the class homogeneous: such factors
// multiply as bare F_p integers, the v-exponent being recoverable from the
// degree of the result.
bool uniformMonomial(const CohomologyClass& a) {
  for (const auto& e : a.entries())
    if (!e.coeff.isMonomial()) return false;
  return a.isHomogeneous();
}

}  // namespace

CohomologyClass CohomologyClass::operator*(const CohomologyClass& o) const {
  checkSameRing(*this, o);
  if (isZero()) return *this;
  if (o.isZero()) return o;
  const CohomologyRing& R = *ring_;
  const int r = R.generators();
  const auto ea = unrankAll(R, entries_);
  const auto eb = unrankAll(R, o.entries_);
  const std::int64_t pairs =
      static_cast<std::int64_t>(entries_.size()) * static_cast<std::int64_t>(o.entries_.size());

  // bounding box of the product support, clipped at the nilpotency orders
  std::vector<std::int64_t> dim(r, 1);
  std::int64_t boxSize = 1;
  for (int i = 0; i < r; ++i) {
    std::int64_t ma = 0, mb = 0;
    for (const auto& e : ea) ma = std::max(ma, e[i]);
    for (const auto& e : eb) mb = std::max(mb, e[i]);
    dim[i] = std::min(ma + mb, R.nilpotency(i) - 1) + 1;
    boxSize *= dim[i];
  }

  std::vector<std::int64_t> sum(r);
  // once the pair count dwarfs the support box, accumulating into a dense
  // box beats building and sorting the full pair list
  if (pairs >= 64 && pairs >= 4 * boxSize && boxSize <= (std::int64_t{1} << 17)) {
    std::vector<std::int64_t> stride(r, 1);
    for (int i = r - 2; i >= 0; --i) stride[i] = stride[i + 1] * dim[i + 1];
    const auto boxIndex = [&](const std::vector<std::int64_t>& s) {
      std::int64_t m = 0;
      for (int i = 0; i < r; ++i) m += s[i] * stride[i];
      return static_cast<std::size_t>(m);
    };
    std::vector<Entry> terms;
    std::vector<std::int64_t> expo(r);
    const auto decode = [&](std::int64_t m) {
      for (int i = 0; i < r; ++i) expo[i] = (m / stride[i]) % dim[i];
    };
    if (uniformMonomial(*this) && uniformMonomial(o)) {
      const std::int64_t p = R.ctx().p;
      const std::int64_t period = R.ctx().vPeriod();
      const std::int64_t degBoth = degree() + o.degree();
      std::vector<std::int64_t> acc(static_cast<std::size_t>(boxSize), 0);
      for (std::size_t x = 0; x < entries_.size(); ++x) {
        const std::int64_t cx = entries_[x].coeff.monomial().c;
        for (std::size_t y = 0; y < o.entries_.size(); ++y) {
          bool alive = true;
          for (int i = 0; i < r; ++i) {
            sum[i] = ea[x][i] + eb[y][i];
            if (sum[i] >= dim[i]) {
              alive = false;
              break;
            }
          }
          if (!alive) continue;
          auto& slot = acc[boxIndex(sum)];
          slot = (slot + cx * o.entries_[y].coeff.monomial().c) % p;
        }
      }
      for (std::int64_t m = 0; m < boxSize; ++m) {
        if (acc[static_cast<std::size_t>(m)] == 0) continue;
        decode(m);
        const std::int64_t mono = R.monomialRank(expo);
        const std::int64_t num = R.monomialDegree(mono) - degBoth;
        internalCheck(num % (2 * period) == 0, "product term off its degree line");
        terms.push_back({mono, GradedScalar::make(R.ctx(), acc[static_cast<std::size_t>(m)],
                                                  num / (2 * period))});
      }
    } else {
      std::vector<GradedScalar> acc(static_cast<std::size_t>(boxSize));
      for (std::size_t x = 0; x < entries_.size(); ++x) {
        for (std::size_t y = 0; y < o.entries_.size(); ++y) {
          bool alive = true;
          for (int i = 0; i < r; ++i) {
            sum[i] = ea[x][i] + eb[y][i];
            if (sum[i] >= dim[i]) {
              alive = false;
              break;
            }
          }
          if (!alive) continue;
          acc[boxIndex(sum)] += entries_[x].coeff * o.entries_[y].coeff;
        }
      }
      for (std::int64_t m = 0; m < boxSize; ++m) {
        if (acc[static_cast<std::size_t>(m)].isZero()) continue;
        decode(m);
        terms.push_back({R.monomialRank(expo), std::move(acc[static_cast<std::size_t>(m)])});
      }
    }
    return fromTerms(ring_, std::move(terms));
  }

  std::vector<Entry> products;
  products.reserve(static_cast<std::size_t>(pairs));
  for (std::size_t x = 0; x < entries_.size(); ++x) {
    for (std::size_t y = 0; y < o.entries_.size(); ++y) {
      bool alive = true;
      for (int i = 0; i < r; ++i) {
        sum[i] = ea[x][i] + eb[y][i];
        if (sum[i] >= R.nilpotency(i)) {
          alive = false;
          break;
        }
      }
      if (!alive) continue;
      products.push_back({R.monomialRank(sum), entries_[x].coeff * o.entries_[y].coeff});
    }
  }
  return fromTerms(ring_, std::move(products));
}

CohomologyClass CohomologyClass::scaled(const GradedScalar& s) const {
  if (s.isZero()) return zero(ring_);
  CohomologyClass r = *this;
  for (Entry& e : r.entries_) e.coeff *= s;
  r.normalize();
  return r;
}

CohomologyClass CohomologyClass::pow(std::int64_t e) const {
  require(e >= 0, "negative power of a ring class");
  internalCheck(ring_ != nullptr, "pow on unbound class");
  CohomologyClass acc = one(ring_);
  CohomologyClass base = *this;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return acc;
}

bool CohomologyClass::operator==(const CohomologyClass& o) const {
  checkSameRing(*this, o);
  if (entries_.size() != o.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].mono != o.entries_[i].mono || entries_[i].coeff != o.entries_[i].coeff)
      return false;
  return true;
}

std::string CohomologyClass::str() const {
  if (isZero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const Entry& e : entries_) {
    if (!first) os << " + ";
    first = false;
    const auto expo = ring_->monomialUnrank(e.mono);
    std::ostringstream mono;
    bool any = false;
    for (std::size_t i = 0; i < expo.size(); ++i) {
      if (expo[i] == 0) continue;
      if (any) mono << "*";
      any = true;
      mono << "x" << (i + 1);
      if (expo[i] > 1) mono << "^" << expo[i];
    }
    const bool scalarIsOne = e.coeff.isMonomial() && e.coeff.monomial().c == 1 &&
                             e.coeff.monomial().vexp == 0;
    const bool needsParens = e.coeff.terms().size() > 1;
    if (!any) {
      os << (needsParens ? "(" : "") << e.coeff.str() << (needsParens ? ")" : "");
    } else if (scalarIsOne) {
      os << mono.str();
    } else {
      os << (needsParens ? "(" : "") << e.coeff.str() << (needsParens ? ")" : "") << "*"
         << mono.str();
    }
  }
  return os.str();
}

CohomologyClass externalProduct(const CohomologyClass& a, const CohomologyClass& b) {
  require(a.ring() && b.ring(), "external product needs ring-bound classes");
  const CohomologyRing& RA = *a.ring();
  const CohomologyRing& RB = *b.ring();
  require(RA.ctx() == RB.ctx(), "external product across different contexts");
  std::vector<int> exps = RA.group().exponents;
  exps.insert(exps.end(), RB.group().exponents.begin(), RB.group().exponents.end());
  RingPtr prod = ringOf(RA.ctx(), AbelianPGroup(RA.group().p, exps),
                        std::max<std::int64_t>(RA.rank() * RB.rank(), 1));
  std::vector<CohomologyClass::Entry> terms;
  for (const auto& ea : a.entries())
    for (const auto& eb : b.entries())
      terms.push_back({ea.mono * RB.rank() + eb.mono, ea.coeff * eb.coeff});
  return CohomologyClass::fromTerms(std::move(prod), std::move(terms));
}

RingHom::RingHom(RingPtr source, RingPtr target, std::vector<CohomologyClass> generatorImages)
    : source_(std::move(source)), target_(std::move(target)),
      genImages_(std::move(generatorImages)) {
  require(static_cast<int>(genImages_.size()) == source_->generators(),
          "one generator image per source generator required");
  powers_.resize(genImages_.size());
  for (std::size_t i = 0; i < genImages_.size(); ++i) {
    const CohomologyClass& img = genImages_[i];
    if (!img.isZero()) {
      require(*img.ring() == *target_, "generator image lives in the wrong ring");
      require(img.isNilpotent(), "generator image must be nilpotent");
      require(img.isHomogeneous() && img.degree() == 2, "generator image must have degree 2");
    }
    // power table up to the source nilpotency (truncated early once zero);
    // the [p^{k_i}]-series vanishing check lives in pullbackHom, which owns
    // an FGL table
    std::vector<CohomologyClass>& tab = powers_[i];
    tab.push_back(CohomologyClass::one(target_));
    for (std::int64_t e = 1; e < source_->nilpotency(static_cast<int>(i)); ++e) {
      CohomologyClass next = tab.back() * img;
      if (next.isZero()) break;
      tab.push_back(std::move(next));
    }
  }
}

CohomologyClass RingHom::applyMonomial(std::int64_t monoRank) const {
  const auto expo = source_->monomialUnrank(monoRank);
  CohomologyClass acc = CohomologyClass::one(target_);
  for (std::size_t i = 0; i < genImages_.size(); ++i) {
    const std::int64_t e = expo[i];
    if (e == 0) continue;
    const std::vector<CohomologyClass>& tab = powers_[i];
    if (e >= static_cast<std::int64_t>(tab.size())) return CohomologyClass::zero(target_);
    acc = acc * tab[e];
    if (acc.isZero()) return acc;
  }
  return acc;
}

CohomologyClass RingHom::apply(const CohomologyClass& a) const {
  if (a.isZero()) return CohomologyClass::zero(target_);
  require(*a.ring() == *source_, "class is not in the source ring of the hom");
  std::vector<CohomologyClass::Entry> acc;
  for (const auto& e : a.entries()) {
    const CohomologyClass img = applyMonomial(e.mono).scaled(e.coeff);
    acc.insert(acc.end(), img.entries().begin(), img.entries().end());
  }
  return CohomologyClass::fromTerms(target_, std::move(acc));
}

}  // namespace morava
