#include "morava/fgl.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace morava {

RationalSeries::RationalSeries(int vars, std::int64_t trunc) : vars_(vars), trunc_(trunc) {
  require(vars == 1 || vars == 2, "series must have 1 or 2 variables");
  require(trunc >= 1, "series truncation must be >= 1");
  c_.resize(vars == 1 ? trunc : trunc * trunc);
}

RationalSeries RationalSeries::variable(int vars, int which, std::int64_t trunc) {
  RationalSeries s(vars, trunc);
  require(which >= 0 && which < vars, "variable index out of range");
  if (trunc > 1) {
    if (vars == 1) s.set(1, 1);
    else if (which == 0) s.set(1, 0, 1);
    else s.set(0, 1, 1);
  }
  return s;
}

std::size_t RationalSeries::idx(std::int64_t i, std::int64_t j) const {
  internalCheck(i >= 0 && i < trunc_ && j >= 0 && j < trunc_, "series index out of range");
  return static_cast<std::size_t>(i * trunc_ + j);
}

const BigRational& RationalSeries::at(std::int64_t i) const {
  internalCheck(vars_ == 1, "univariate access on bivariate series");
  internalCheck(i >= 0 && i < trunc_, "series index out of range");
  return c_[static_cast<std::size_t>(i)];
}

const BigRational& RationalSeries::at(std::int64_t i, std::int64_t j) const {
  internalCheck(vars_ == 2, "bivariate access on univariate series");
  return c_[idx(i, j)];
}

void RationalSeries::set(std::int64_t i, const BigRational& v) {
  internalCheck(vars_ == 1, "univariate access on bivariate series");
  internalCheck(i >= 0 && i < trunc_, "series index out of range");
  c_[static_cast<std::size_t>(i)] = v;
}

void RationalSeries::set(std::int64_t i, std::int64_t j, const BigRational& v) {
  internalCheck(vars_ == 2, "bivariate access on univariate series");
  c_[idx(i, j)] = v;
}

bool RationalSeries::isZero() const {
  for (const BigRational& x : c_)
    if (x != 0) return false;
  return true;
}

RationalSeries RationalSeries::operator+(const RationalSeries& o) const {
  internalCheck(vars_ == o.vars_ && trunc_ == o.trunc_, "series shape mismatch");
  RationalSeries r = *this;
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (o.c_[i] != 0) r.c_[i] += o.c_[i];
  return r;
}

RationalSeries RationalSeries::operator-(const RationalSeries& o) const {
  internalCheck(vars_ == o.vars_ && trunc_ == o.trunc_, "series shape mismatch");
  RationalSeries r = *this;
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (o.c_[i] != 0) r.c_[i] -= o.c_[i];
  return r;
}

RationalSeries RationalSeries::operator*(const RationalSeries& o) const {
  internalCheck(vars_ == o.vars_ && trunc_ == o.trunc_, "series shape mismatch");
  RationalSeries r(vars_, trunc_);
  if (vars_ == 1) {
    for (std::int64_t i = 0; i < trunc_; ++i) {
      if (c_[static_cast<std::size_t>(i)] == 0) continue;
      for (std::int64_t j = 0; i + j < trunc_; ++j) {
        const BigRational& b = o.c_[static_cast<std::size_t>(j)];
        if (b == 0) continue;
        r.c_[static_cast<std::size_t>(i + j)] += c_[static_cast<std::size_t>(i)] * b;
      }
    }
  } else {
    for (std::int64_t i1 = 0; i1 < trunc_; ++i1)
      for (std::int64_t j1 = 0; j1 < trunc_; ++j1) {
        const BigRational& a = c_[idx(i1, j1)];
        if (a == 0) continue;
        for (std::int64_t i2 = 0; i1 + i2 < trunc_; ++i2)
          for (std::int64_t j2 = 0; j1 + j2 < trunc_; ++j2) {
            const BigRational& b = o.c_[idx(i2, j2)];
            if (b == 0) continue;
            r.c_[idx(i1 + i2, j1 + j2)] += a * b;
          }
      }
  }
  return r;
}

RationalSeries RationalSeries::pow(std::int64_t e) const {
  require(e >= 0, "negative series power");
  RationalSeries acc(vars_, trunc_);
  if (trunc_ > 0) {
    if (vars_ == 1) acc.set(0, 1);
    else acc.set(0, 0, 1);
  }
  RationalSeries base = *this;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return acc;
}

RationalSeries RationalSeries::compose(const RationalSeries& g) const {
  internalCheck(vars_ == 1 && g.vars_ == 1 && trunc_ == g.trunc_, "compose shape mismatch");
  require(g.at(0) == 0, "composition needs g(0) = 0");
  RationalSeries out(1, trunc_);
  out.set(0, at(0));
  // powers of g only at the exponents where s is nonzero, sharing a running
  // power via the gap (series are sparse in practice: the Honda logarithm)
  RationalSeries gp = g;  // g^1
  std::int64_t have = 1;
  for (std::int64_t k = 1; k < trunc_; ++k) {
    if (at(k) == 0) continue;
    if (gp.isZero()) break;
    while (have < k) {
      gp = gp * g;
      ++have;
      if (gp.isZero()) break;
    }
    if (gp.isZero()) break;
    for (std::int64_t d = 0; d < trunc_; ++d)
      if (gp.at(d) != 0) out.set(d, out.at(d) + at(k) * gp.at(d));
  }
  return out;
}

bool RationalSeries::operator==(const RationalSeries& o) const {
  return vars_ == o.vars_ && trunc_ == o.trunc_ && c_ == o.c_;
}

RationalSeries hondaLogarithm(const PrimeContext& ctx, std::int64_t trunc) {
  RationalSeries l(1, trunc);
  BigInt denom = 1;
  for (std::int64_t e = 1; e < trunc; e *= ctx.q()) {
    l.set(e, BigRational(1, denom));
    if (e > (trunc - 1) / ctx.q()) break;  // next exponent would overflow/exceed
    denom *= ctx.p;
  }
  return l;
}

RationalSeries seriesCompositionalInverse(const RationalSeries& s) {
  require(s.vars() == 1, "compositional inverse needs a univariate series");
  const std::int64_t T = s.trunc();
  require(T >= 2 && s.at(0) == 0 && s.at(1) == 1,
          "compositional inverse needs s = x + higher terms");
  RationalSeries g = RationalSeries::variable(1, 0, T);
  for (std::int64_t pass = 0; pass <= T + 1; ++pass) {
    RationalSeries r = s.compose(g);
    r.set(1, r.at(1) - 1);  // r = s(g) - x
    if (r.isZero()) {
      // verify both ways: g is a two-sided inverse under composition
      RationalSeries check = g.compose(s);
      check.set(1, check.at(1) - 1);
      internalCheck(check.isZero(), "one-sided compositional inverse");
      return g;
    }
    g = g - r;
  }
  failInternal("compositional inverse did not stabilize");
}

namespace {

// Exponent of v on the degree-(i+j) block; nonzero coefficients only occur
// when (q-1) | (i+j-1).
std::int64_t vexpOf(const PrimeContext& ctx, std::int64_t i, std::int64_t j) {
  const std::int64_t num = i + j - 1;
  internalCheck(num % ctx.vPeriod() == 0, "inhomogeneous table entry");
  return num / ctx.vPeriod();
}

// Reference construction over exact rationals: F = exp(l(x) + l(y)) with the
// univariate stages carried to degree 2T-2 so the block is the exact image of
// the infinite-precision law.  Exact but impractical beyond small truncations
// (intermediate coefficients grow factorially); retained as an independent
// cross-check of the modular construction.
std::vector<std::int64_t> rationalBlockModP(const PrimeContext& ctx, std::int64_t T) {
  const std::int64_t D = 2 * T - 1;
  const RationalSeries l = hondaLogarithm(ctx, D);
  const RationalSeries ex = seriesCompositionalInverse(l);

  // s(x,y) = l(x) + l(y), kept as its sparse support
  std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, BigRational>> sTerms;
  for (std::int64_t d = 1; d < D; ++d)
    if (l.at(d) != 0) {
      sTerms.push_back({{d, 0}, l.at(d)});
      sTerms.push_back({{0, d}, l.at(d)});
    }

  // F = sum_m ex_m * s^m on the block {i,j < T}; powers of s accumulated
  // incrementally with zero-skipping
  std::vector<BigRational> F(static_cast<std::size_t>(T * T));
  std::vector<BigRational> powm(static_cast<std::size_t>(T * T));
  powm[0] = 1;
  for (std::int64_t m = 0; m < D; ++m) {
    if (m > 0) {
      std::vector<BigRational> next(static_cast<std::size_t>(T * T));
      bool any = false;
      for (std::int64_t i = 0; i < T; ++i)
        for (std::int64_t j = 0; j < T; ++j) {
          const BigRational& cur = powm[static_cast<std::size_t>(i * T + j)];
          if (cur == 0) continue;
          for (const auto& [sij, sc] : sTerms) {
            const std::int64_t ii = i + sij.first, jj = j + sij.second;
            if (ii >= T || jj >= T) continue;
            next[static_cast<std::size_t>(ii * T + jj)] += cur * sc;
            any = true;
          }
        }
      powm = std::move(next);
      if (!any) break;
    }
    if (ex.at(m) != 0)
      for (std::size_t t = 0; t < powm.size(); ++t)
        if (powm[t] != 0) F[t] += ex.at(m) * powm[t];
  }

  // reduce mod p with p-integrality checks
  std::vector<std::int64_t> blk(static_cast<std::size_t>(T * T), 0);
  for (std::int64_t i = 0; i < T; ++i)
    for (std::int64_t j = 0; j < T; ++j) {
      const BigRational& r = F[static_cast<std::size_t>(i * T + j)];
      if (r == 0) continue;
      blk[static_cast<std::size_t>(i * T + j)] = pIntegralReduce(r, ctx.p);
    }

  // unitality and commutativity hold exactly over Q; checked before reduction
  for (std::int64_t i = 0; i < T; ++i) {
    const BigRational& xi = F[static_cast<std::size_t>(i * T)];
    const BigRational& yi = F[static_cast<std::size_t>(i)];
    internalCheck(xi == (i == 1 ? 1 : 0), "unitality violated in x");
    internalCheck(yi == (i == 1 ? 1 : 0), "unitality violated in y");
  }
  for (std::int64_t i = 0; i < T; ++i)
    for (std::int64_t j = 0; j < i; ++j)
      internalCheck(F[static_cast<std::size_t>(i * T + j)] ==
                        F[static_cast<std::size_t>(j * T + i)],
                    "commutativity violated");
  return blk;
}

// ---------------------------------------------------------------------------
// Modular block construction.
//
// The law is the unique solution of
//   F(x,y) = x + y + sum_{i>=1} (x^{q^i} + y^{q^i} - F(x,y)^{q^i}) / p^i
// whose right-hand side is p-integral (term by term it is not; only the sum
// over all levels clears its common denominator, which is what assemble()
// exploits and checks).  The block
// {i,j < T} is computed in the quotient Z_p[x,y]/(x^T, y^T), slice by slice
// in total degree m (up to Mtot = 2T-2), maintaining the ladder of q-power
// arrays F^{q^i} incrementally through binary addition chains.
//
// Residues are carried modulo a fixed power of p.  A division by p^i costs i
// base-p digits of certainty while the contributing degrees shrink by
// q^i - 1 >= i(q-1), so carrying
//   digits(m) = 1 + floor((Mtot - m) / (q - 1))
// digits at total degree m -- plus i extra digits on the ladder arrays whose
// top feeds the division by p^i -- keeps at least one proven digit on every
// block slice.  The proven precision of every slice is tracked through each
// convolution and division and checked against the schedule; the computation
// fails hard rather than produce an unproven digit.
//
// Every maintained array is symmetric in (x,y), so each antidiagonal slice is
// palindromic and only its lower half is convolved, the rest mirrored.
// ---------------------------------------------------------------------------

constexpr std::int32_t kExactPrec = std::numeric_limits<std::int32_t>::max() / 2;

using U256 = boost::multiprecision::uint256_t;

template <class VT, class AccT, bool kGuarded, int kAccBits>
class BlockBuilder {
 public:
  BlockBuilder(const PrimeContext& ctx, std::int64_t T, int threads)
      : p_(ctx.p), q_(ctx.q()), T_(T), Mtot_(2 * T - 2),
        threads_(std::max(threads, 1)) {
    dig_.assign(static_cast<std::size_t>(Mtot_ + 1), 1);
    for (std::int64_t m = 1; m <= Mtot_; ++m)
      dig_[static_cast<std::size_t>(m)] =
          1 + static_cast<std::int32_t>((Mtot_ - m) / (q_ - 1));
    imax_ = 0;
    for (std::int64_t e = q_; e <= Mtot_ && imax_ < 62; e *= q_) {
      ++imax_;
      if (e > Mtot_ / q_) break;
    }
    rmax_ = dig_[1];
    pPowBig_.resize(static_cast<std::size_t>(rmax_) + 1);
    pPowBig_[0] = 1;
    for (std::int32_t i = 1; i <= rmax_; ++i) pPowBig_[i] = pPowBig_[i - 1] * p_;
    pPowAcc_.resize(static_cast<std::size_t>(rmax_) + 1);
    for (std::int32_t i = 0; i <= rmax_; ++i)
      pPowAcc_[i] = static_cast<AccT>(pPowBig_[i]);
    if constexpr (kGuarded) {
      guard_ = static_cast<AccT>(BigInt(1) << (kAccBits - 1));
      internalCheck(pPowBig_[rmax_] * pPowBig_[rmax_] <= (BigInt(1) << (kAccBits - 1)),
                    "residue carrier too narrow for the precision schedule");
    }
    buildLadder();
    run();
  }

  std::vector<std::int64_t> blockModP() const {
    std::vector<std::int64_t> blk(static_cast<std::size_t>(T_ * T_), 0);
    const Arr& F = arrays_[0];
    for (std::int64_t m = 1; m <= Mtot_; ++m) {
      internalCheck(F.prec[static_cast<std::size_t>(m)] >= 1,
                    "no proven digits left on a block slice");
      const std::int64_t aLo = rowLo(m), aHi = rowHi(m);
      const auto& row = F.row[static_cast<std::size_t>(m)];
      for (std::int64_t a = aLo; a <= aHi; ++a) {
        const BigInt r = BigInt(row[static_cast<std::size_t>(a - aLo)]) % p_;
        blk[static_cast<std::size_t>(a * T_ + (m - a))] = r.convert_to<std::int64_t>();
      }
    }
    return blk;
  }

 private:
  struct Arr {
    int level;                  // ladder level i (the law itself is level 0)
    std::int64_t lowdeg, maxdeg;
    int srcA = -1, srcB = -1;   // product of arrays_[srcA] * arrays_[srcB]
    std::vector<std::vector<VT>> row;  // per total degree, dense antidiagonal
    std::vector<std::int32_t> prec;    // proven base-p digits per slice
  };

  std::int64_t p_, q_, T_, Mtot_;
  int threads_, imax_;
  std::int32_t rmax_;
  std::vector<std::int32_t> dig_;
  std::vector<BigInt> pPowBig_;
  std::vector<AccT> pPowAcc_;
  AccT guard_{};
  std::vector<Arr> arrays_;
  std::vector<int> top_;  // top_[i] = index of F^{q^i}; top_[0] = 0

  std::int64_t rowLo(std::int64_t m) const { return std::max<std::int64_t>(0, m - (T_ - 1)); }
  std::int64_t rowHi(std::int64_t m) const { return std::min<std::int64_t>(T_ - 1, m); }
  std::int32_t schedDigits(int level, std::int64_t m) const {
    return std::min<std::int32_t>(rmax_, dig_[static_cast<std::size_t>(m)] +
                                             static_cast<std::int32_t>(level));
  }

  int pushNode(int level, std::int64_t e, int a, int b, std::int64_t unit) {
    Arr n;
    n.level = level;
    n.lowdeg = e * unit;
    n.maxdeg = Mtot_ - (q_ - e) * unit;
    n.srcA = a;
    n.srcB = b;
    arrays_.push_back(std::move(n));
    return static_cast<int>(arrays_.size()) - 1;
  }

  void buildLadder() {
    Arr f;
    f.level = 0;
    f.lowdeg = 1;
    f.maxdeg = Mtot_;
    arrays_.push_back(std::move(f));
    top_.assign(static_cast<std::size_t>(imax_) + 1, 0);
    for (int i = 1; i <= imax_; ++i) {
      const std::int64_t unit = powi(q_, i - 1);  // lowdeg of this level's base
      const int base = top_[static_cast<std::size_t>(i - 1)];
      // left-to-right binary addition chain for the exponent q
      int cur = base;
      std::int64_t e = 1;
      std::int64_t msb = 1;
      while (msb * 2 <= q_) msb *= 2;
      for (std::int64_t bit = msb / 2; bit >= 1; bit /= 2) {
        cur = pushNode(i, e * 2, cur, cur, unit);
        e *= 2;
        if (q_ & bit) {
          cur = pushNode(i, e + 1, cur, base, unit);
          e += 1;
        }
      }
      internalCheck(e == q_, "power ladder does not reach q");
      top_[static_cast<std::size_t>(i)] = cur;
    }
  }

  void run() {
    for (auto& a : arrays_) {
      a.row.resize(static_cast<std::size_t>(Mtot_) + 1);
      a.prec.assign(static_cast<std::size_t>(Mtot_) + 1, 0);
    }
    // degree-1 seed: F = x + y exactly (values below every storage modulus)
    arrays_[0].row[1] = {VT(1), VT(1)};
    arrays_[0].prec[1] = kExactPrec;
    for (std::int64_t m = 2; m <= Mtot_; ++m) {
      for (std::size_t k = 1; k < arrays_.size(); ++k) extend(static_cast<int>(k), m);
      assemble(m);
    }
  }

  void mac(AccT& slot, const VT& a, const VT& b, const AccT& gmod) const {
    if constexpr (kGuarded) {
      slot += static_cast<AccT>(a) * b;
      if (slot >= guard_) slot %= gmod;
    } else {
      (void)gmod;
      slot += static_cast<AccT>(a) * b;
    }
  }

  void convRange(const Arr& A, const Arr& B, std::int64_t m, std::int64_t d0,
                 std::int64_t d1, std::int64_t aLo, std::int64_t half,
                 const AccT& gmod, std::vector<AccT>& acc) const {
    for (std::int64_t d = d0; d <= d1; ++d) {
      const auto& rA = A.row[static_cast<std::size_t>(d)];
      const auto& rB = B.row[static_cast<std::size_t>(m - d)];
      if (rA.empty() || rB.empty()) continue;
      const std::int64_t aLoA = rowLo(d), aLoB = rowLo(m - d);
      const std::int64_t aHiA = aLoA + static_cast<std::int64_t>(rA.size()) - 1;
      const std::int64_t aHiB = aLoB + static_cast<std::int64_t>(rB.size()) - 1;
      for (std::int64_t aA = aLoA; aA <= aHiA; ++aA) {
        const VT& vA = rA[static_cast<std::size_t>(aA - aLoA)];
        if (vA == 0) continue;
        const std::int64_t bLo = std::max(aLoB, aLo - aA);
        const std::int64_t bHi = std::min(aHiB, half - aA);
        for (std::int64_t aB = bLo; aB <= bHi; ++aB) {
          const VT& vB = rB[static_cast<std::size_t>(aB - aLoB)];
          if (vB == 0) continue;
          mac(acc[static_cast<std::size_t>(aA + aB - aLo)], vA, vB, gmod);
        }
      }
    }
  }

  void extend(int k, std::int64_t m) {
    Arr& N = arrays_[static_cast<std::size_t>(k)];
    if (m > N.maxdeg) return;
    if (m < N.lowdeg) {  // structurally zero slice: exact at all precisions
      N.prec[static_cast<std::size_t>(m)] = kExactPrec;
      return;
    }
    const Arr& A = arrays_[static_cast<std::size_t>(N.srcA)];
    const Arr& B = arrays_[static_cast<std::size_t>(N.srcB)];
    const std::int64_t dLo = A.lowdeg, dHi = m - B.lowdeg;
    internalCheck(dHi <= A.maxdeg && m - dLo <= B.maxdeg,
                  "ladder slice outside its maintained range");
    const std::int64_t aLo = rowLo(m), half = m / 2;
    const std::size_t accLen = static_cast<std::size_t>(half - aLo + 1);
    const std::int32_t sched = schedDigits(N.level, m);
    const AccT gmod = pPowAcc_[static_cast<std::size_t>(sched)];

    std::int32_t prec = kExactPrec;
    for (std::int64_t d = dLo; d <= dHi; ++d)
      prec = std::min(prec, std::min(A.prec[static_cast<std::size_t>(d)],
                                     B.prec[static_cast<std::size_t>(m - d)]));

    std::vector<AccT> acc(accLen, AccT(0));
    // cost-balanced d-chunks; per-thread buffers merge by modular addition, so
    // the result is independent of the partition
    std::int64_t est = 0;
    for (std::int64_t d = dLo; d <= dHi; ++d)
      est += static_cast<std::int64_t>(A.row[static_cast<std::size_t>(d)].size()) *
             static_cast<std::int64_t>(B.row[static_cast<std::size_t>(m - d)].size());
    if (threads_ > 1 && est >= (1 << 19) && dHi > dLo) {
      const int nt = static_cast<int>(
          std::min<std::int64_t>(threads_, dHi - dLo + 1));
      std::vector<std::pair<std::int64_t, std::int64_t>> chunks;
      std::int64_t target = est / nt + 1, run = 0, start = dLo;
      for (std::int64_t d = dLo; d <= dHi; ++d) {
        run += static_cast<std::int64_t>(A.row[static_cast<std::size_t>(d)].size()) *
               static_cast<std::int64_t>(B.row[static_cast<std::size_t>(m - d)].size());
        if (run >= target && d < dHi) {
          chunks.push_back({start, d});
          start = d + 1;
          run = 0;
        }
      }
      chunks.push_back({start, dHi});
      std::vector<std::vector<AccT>> bufs(chunks.size(), std::vector<AccT>(accLen, AccT(0)));
      std::vector<std::thread> ts;
      for (std::size_t c = 0; c < chunks.size(); ++c)
        ts.emplace_back([&, c] {
          convRange(A, B, m, chunks[c].first, chunks[c].second, aLo, half, gmod, bufs[c]);
        });
      for (auto& t : ts) t.join();
      for (const auto& b : bufs)
        for (std::size_t i = 0; i < accLen; ++i) mac0(acc[i], b[i], gmod);
    } else {
      convRange(A, B, m, dLo, dHi, aLo, half, gmod, acc);
    }

    const std::int64_t aHi = rowHi(m);
    std::vector<VT> row(static_cast<std::size_t>(aHi - aLo + 1));
    for (std::int64_t a = aLo; a <= half; ++a) {
      const VT v = static_cast<VT>(acc[static_cast<std::size_t>(a - aLo)] % gmod);
      row[static_cast<std::size_t>(a - aLo)] = v;
      row[static_cast<std::size_t>(m - a - aLo)] = v;  // palindromic mirror
    }
    N.row[static_cast<std::size_t>(m)] = std::move(row);
    N.prec[static_cast<std::size_t>(m)] = std::min(prec, sched);
  }

  // merge-time addition with the same overflow discipline as mac
  void mac0(AccT& slot, const AccT& add, const AccT& gmod) const {
    if constexpr (kGuarded) {
      slot += add;
      if (slot >= guard_) slot %= gmod;
    } else {
      (void)gmod;
      slot += add;
    }
  }

  // The level-i numerators x^{q^i} + y^{q^i} - F^{q^i} are not individually
  // divisible by p^i; only their weighted sum over all levels is integral.
  // Assemble therefore accumulates sum = Σ_i p^{I-i} · (numerator_i mod
  // p^{dig(m)+i}) over the common denominator p^I, where I is the deepest
  // level reaching degree m; the sum is provably ≡ p^I · (law slice) modulo
  // p^{dig(m)+I}, so dividing once keeps the scheduled dig(m) digits.
  void assemble(std::int64_t m) {
    const std::int64_t aLo = rowLo(m), aHi = rowHi(m);
    const std::size_t len = static_cast<std::size_t>(aHi - aLo + 1);
    const std::int32_t dm = dig_[static_cast<std::size_t>(m)];
    const BigInt& outMod = pPowBig_[static_cast<std::size_t>(dm)];
    int levels = 0;
    std::int64_t qpow = 1;
    while (levels < imax_ && qpow <= m / q_) {
      qpow *= q_;
      ++levels;
    }
    std::vector<BigInt> sum(len);
    std::int32_t prec = kExactPrec;
    const BigInt& sumMod = pPowBig_[static_cast<std::size_t>(dm + levels)];
    std::int64_t qi = 1;
    for (int i = 1; i <= levels; ++i) {
      qi *= q_;
      const Arr& Tp = arrays_[static_cast<std::size_t>(top_[static_cast<std::size_t>(i)])];
      const std::int32_t ptop = Tp.prec[static_cast<std::size_t>(m)];
      if (ptop != kExactPrec) {
        internalCheck(ptop - i >= dm, "working precision fell below its schedule");
        prec = std::min(prec, ptop - i);
      }
      const auto& rT = Tp.row[static_cast<std::size_t>(m)];
      internalCheck(!rT.empty(), "ladder top slice missing during assembly");
      const BigInt& modI = pPowBig_[static_cast<std::size_t>(dm + i)];
      const BigInt& scale = pPowBig_[static_cast<std::size_t>(levels - i)];
      for (std::int64_t a = aLo; a <= aHi; ++a) {
        const BigInt top = BigInt(rT[static_cast<std::size_t>(a - aLo)]) % modI;
        const BigInt base = (m == qi && (a == qi || a == 0)) ? 1 : 0;
        const BigInt r = ((base - top) % modI + modI) % modI;
        BigInt& s = sum[static_cast<std::size_t>(a - aLo)];
        s = (s + scale * r) % sumMod;
      }
    }
    const BigInt& pLev = pPowBig_[static_cast<std::size_t>(levels)];
    Arr& F = arrays_[0];
    std::vector<VT> row(len);
    for (std::size_t k = 0; k < len; ++k) {
      internalCheck(sum[k] % pLev == 0,
                    "law numerator sum not divisible by the level denominator");
      row[k] = static_cast<VT>((sum[k] / pLev) % outMod);
    }
    F.row[static_cast<std::size_t>(m)] = std::move(row);
    F.prec[static_cast<std::size_t>(m)] = std::min(prec, dm);
  }
};

// Picks the narrowest residue carrier wide enough for the precision schedule.
std::vector<std::int64_t> modularBlockModP(const PrimeContext& ctx, std::int64_t T,
                                           int threads) {
  const std::int64_t q = ctx.q(), Mtot = 2 * T - 2;
  if (q > Mtot) {
    // no interaction terms reach the block: F = x + y there
    std::vector<std::int64_t> blk(static_cast<std::size_t>(T * T), 0);
    blk[1] = 1;
    blk[static_cast<std::size_t>(T)] = 1;
    return blk;
  }
  const std::int32_t rmax = 1 + static_cast<std::int32_t>((Mtot - 1) / (q - 1));
  BigInt pR = 1;
  for (std::int32_t i = 0; i < rmax; ++i) pR *= ctx.p;
  if (ctx.p == 2) {
    if (rmax <= 63)
      return BlockBuilder<std::uint64_t, std::uint64_t, false, 64>(ctx, T, threads)
          .blockModP();
    if (rmax <= 256)
      return BlockBuilder<U256, U256, false, 256>(ctx, T, threads).blockModP();
  } else {
    if (pR * pR <= (BigInt(1) << 127))
      return BlockBuilder<std::uint64_t, unsigned __int128, true, 128>(ctx, T, threads)
          .blockModP();
    if (pR * pR <= (BigInt(1) << 255))
      return BlockBuilder<U256, U256, true, 256>(ctx, T, threads).blockModP();
  }
  return BlockBuilder<BigInt, BigInt, false, 0>(ctx, T, threads).blockModP();
}

// Largest truncation at which the exact-rational reference is cheap enough to
// run on every construction as a second, independent derivation of the block.
constexpr std::int64_t kRationalCrossCheckMax = 32;

}  // namespace

FglTable::FglTable(const PrimeContext& ctx, std::int64_t trunc, int buildThreads)
    : ctx_(ctx), trunc_(trunc) {
  require(trunc >= 2, "table truncation must be >= 2");
  const std::int64_t T = trunc_;
  a_ = modularBlockModP(ctx_, T, buildThreads);

  // unitality and commutativity of the reduced block
  for (std::int64_t i = 0; i < T; ++i) {
    internalCheck(a_[static_cast<std::size_t>(i * T)] == (i == 1 ? 1 : 0),
                  "unitality violated in x");
    internalCheck(a_[static_cast<std::size_t>(i)] == (i == 1 ? 1 : 0),
                  "unitality violated in y");
    for (std::int64_t j = 0; j < i; ++j)
      internalCheck(a_[static_cast<std::size_t>(i * T + j)] ==
                        a_[static_cast<std::size_t>(j * T + i)],
                    "commutativity violated");
  }
  // homogeneity: nonzero coefficients only on integral v-exponent lines
  for (std::int64_t i = 0; i < T; ++i)
    for (std::int64_t j = 0; j < T; ++j)
      if (a_[static_cast<std::size_t>(i * T + j)] != 0)
        internalCheck(i + j >= 1 && (i + j - 1) % ctx_.vPeriod() == 0,
                      "table entry violates homogeneity");

  if (T <= kRationalCrossCheckMax)
    internalCheck(a_ == rationalBlockModP(ctx_, T),
                  "modular and rational constructions disagree");

  for (std::int64_t i = 0; i < T; ++i)
    for (std::int64_t j = 0; j < T; ++j) {
      const std::int64_t c = a_[static_cast<std::size_t>(i * T + j)];
      if (c == 0) continue;
      nonzero_.push_back({i, j, c});
      if (i >= 1 && j >= 1) interior_.push_back({i, j, c});
    }
}

std::int64_t FglTable::coeff(std::int64_t i, std::int64_t j) const {
  internalCheck(i >= 0 && i < trunc_ && j >= 0 && j < trunc_, "table access out of block");
  return a_[static_cast<std::size_t>(i * trunc_ + j)];
}

GradedScalar FglTable::gradedCoeff(std::int64_t i, std::int64_t j) const {
  const std::int64_t c = coeff(i, j);
  if (c == 0) return GradedScalar::zero(ctx_);
  return GradedScalar::make(ctx_, c, vexpOf(ctx_, i, j));
}

std::int64_t FglTable::vExponent(std::int64_t i, std::int64_t j) const {
  return vexpOf(ctx_, i, j);
}

namespace {
std::mutex g_fglCacheMutex;
std::map<std::tuple<std::int64_t, int, std::int64_t>, FglPtr> g_fglCache;
}  // namespace

FglPtr fglTableFor(const PrimeContext& ctx, std::int64_t trunc, int buildThreads) {
  {
    std::lock_guard<std::mutex> lock(g_fglCacheMutex);
    // the map is ordered by (p, n, trunc): the first entry at or past the
    // request with matching (p, n) is a superset block and serves verbatim
    auto it = g_fglCache.lower_bound(std::make_tuple(ctx.p, ctx.n, trunc));
    if (it != g_fglCache.end() && std::get<0>(it->first) == ctx.p &&
        std::get<1>(it->first) == ctx.n)
      return it->second;
  }
  FglPtr made = std::make_shared<FglTable>(ctx, trunc, buildThreads);
  std::lock_guard<std::mutex> lock(g_fglCacheMutex);
  auto [it, _] = g_fglCache.emplace(std::make_tuple(ctx.p, ctx.n, trunc), std::move(made));
  return it->second;
}

namespace {

// Powers f^0..f^(last nonzero); asserts the table block covers the argument.
std::vector<CohomologyClass> powersUntilZero(const FglTable& table, const CohomologyClass& f) {
  require(f.isNilpotent(), "formal series argument must be nilpotent");
  std::vector<CohomologyClass> pw;
  pw.push_back(CohomologyClass::one(f.ring()));
  while (!pw.back().isZero()) {
    if (static_cast<std::int64_t>(pw.size()) > table.trunc()) break;
    pw.push_back(pw.back() * f);
  }
  // pw.back() is zero iff nilpotency index <= table truncation
  internalCheck(pw.back().isZero(),
                "table truncation too small for argument nilpotency");
  pw.pop_back();
  return pw;
}

}  // namespace

CohomologyClass formalSum(const FglTable& table, const CohomologyClass& f,
                          const CohomologyClass& g) {
  if (f.isZero()) {
    require(g.isZero() || g.isNilpotent(), "formal series argument must be nilpotent");
    return g;
  }
  if (g.isZero()) {
    require(f.isNilpotent(), "formal series argument must be nilpotent");
    return f;
  }
  require(*f.ring() == *g.ring(), "formal sum arguments live in different rings");
  require(f.ring()->ctx() == table.ctx(), "table context does not match ring context");
  const auto fp = powersUntilZero(table, f);
  const auto gp = powersUntilZero(table, g);
  const std::int64_t nf = static_cast<std::int64_t>(fp.size());  // f^nf = 0
  const std::int64_t ng = static_cast<std::int64_t>(gp.size());
  std::vector<CohomologyClass::Entry> acc(f.entries());
  acc.insert(acc.end(), g.entries().begin(), g.entries().end());
  for (const FglTable::Entry& e : table.interior()) {
    if (e.i >= nf || e.j >= ng) continue;
    const CohomologyClass term = (fp[e.i] * gp[e.j]).scaled(table.gradedCoeff(e.i, e.j));
    acc.insert(acc.end(), term.entries().begin(), term.entries().end());
  }
  return CohomologyClass::fromTerms(f.ring(), std::move(acc));
}

namespace {

// [k](f) for k >= 1 by binary double-and-add; split out so formalNegate can
// use it without recursing through the m < 0 branch of mSeries.
CohomologyClass positiveSeries(const FglTable& table, std::int64_t k,
                               const CohomologyClass& f) {
  int top = 62;
  while (top > 0 && !((k >> top) & 1)) --top;
  CohomologyClass out = CohomologyClass::zero(f.ring());
  for (int b = top; b >= 0; --b) {
    out = formalSum(table, out, out);
    if ((k >> b) & 1) out = formalSum(table, out, f);
  }
  return out;
}

}  // namespace

CohomologyClass formalNegate(const FglTable& table, const CohomologyClass& f) {
  if (f.isZero()) return f;
  require(f.isNilpotent(), "formal inverse argument must be nilpotent");
  const PrimeContext& ctx = table.ctx();
  CohomologyClass cand = f.scaled(GradedScalar::make(ctx, -1, 0));
  if (ctx.p == 2) {
    // [2^K - 1](f) with 2^{Kn} at or above the nilpotency bound of f: there
    // the 2^K-series collapses to v^e f^{2^{Kn}} = 0, so [2^K - 1] = [-1]
    std::int64_t bound = 1;
    for (int i = 0; i < f.ring()->generators(); ++i)
      bound += f.ring()->nilpotency(i) - 1;
    std::int64_t qK = 1, M = 1;
    while (qK < bound) {
      qK *= ctx.q();
      M *= ctx.p;
    }
    cand = positiveSeries(table, M - 1, f);
  }
  // for odd p the law is p-typical and -f is the inverse on the nose
  internalCheck(formalSum(table, f, cand).isZero(), "formal inverse verification failed");
  return cand;
}

CohomologyClass mSeries(const FglTable& table, std::int64_t m, const CohomologyClass& f) {
  require(f.isZero() || f.isNilpotent(), "m-series argument must be nilpotent");
  if (m == 0 || f.isZero()) return CohomologyClass::zero(f.ring());
  const CohomologyClass base = m > 0 ? f : formalNegate(table, f);
  return positiveSeries(table, m > 0 ? m : -m, base);
}

namespace {

// w^(q) for q a power of p, computed termwise: in a commutative F_p-algebra
// the multinomial cross-terms of a q-th power vanish, F_p coefficients are
// fixed by Fermat, and v-exponents scale by q.
CohomologyClass frobeniusPower(const CohomologyClass& w, std::int64_t q) {
  if (w.isZero()) return w;
  const CohomologyRing& R = *w.ring();
  const PrimeContext& ctx = R.ctx();
  std::vector<CohomologyClass::Entry> terms;
  for (const auto& e : w.entries()) {
    auto expo = R.monomialUnrank(e.mono);
    bool alive = true;
    for (std::size_t i = 0; i < expo.size(); ++i) {
      expo[i] *= q;
      if (expo[i] >= R.nilpotency(static_cast<int>(i))) {
        alive = false;
        break;
      }
    }
    if (!alive) continue;
    GradedScalar c = GradedScalar::zero(ctx);
    for (const auto& t : e.coeff.terms()) c += GradedScalar::make(ctx, t.c, t.vexp * q);
    terms.push_back({R.monomialRank(expo), std::move(c)});
  }
  return CohomologyClass::fromTerms(w.ring(), std::move(terms));
}

}  // namespace

CohomologyClass pkCoseries(const FglTable& table, int k, const CohomologyClass& t) {
  require(k >= 1, "co-series needs k >= 1");
  require(t.isZero() || t.isNilpotent(), "co-series argument must be nilpotent");
  const PrimeContext& ctx = table.ctx();
  const std::int64_t qk = powi(ctx.p, static_cast<std::int64_t>(k) * ctx.n);
  const std::int64_t m = (qk - 1) / ctx.vPeriod();
  internalCheck(m * ctx.vPeriod() == qk - 1, "co-series exponent not integral");
  if (t.isZero()) return t;
  // t^(q^k - 1): the exponent has k base-q digits, all q-1, so the power
  // factors as prod_s (t^(q-1))^(q^s) with each q^s-th power a termwise
  // Frobenius of the previous factor
  const std::int64_t q = ctx.q();
  const CohomologyClass base = t.pow(q - 1);
  CohomologyClass acc = base, fr = base;
  for (int s = 1; s < k; ++s) {
    fr = frobeniusPower(fr, q);
    acc = acc * fr;
  }
  return acc.scaled(GradedScalar::vpow(ctx, m));
}

RingHom pullbackHom(const PrimeContext& ctx, const GroupHom& f, std::int64_t rankCap) {
  RingPtr source = ringOf(ctx, f.codomain, rankCap);
  RingPtr target = ringOf(ctx, f.domain, rankCap);
  // chain truncation bound: partial sums of the per-generator images reach
  // nilpotency at most 1 + sum (N_j - 1) over domain generators
  std::int64_t chain = 1;
  for (int j = 0; j < target->generators(); ++j) chain += target->nilpotency(j) - 1;
  const FglPtr table = fglTableFor(ctx, std::max<std::int64_t>(chain, 2));

  std::vector<CohomologyClass> images;
  for (int i = 0; i < source->generators(); ++i) {
    const std::int64_t ki = powi(ctx.p, f.codomain.exponents[i]);  // order of source gen i
    CohomologyClass img = CohomologyClass::zero(target);
    for (int j = 0; j < target->generators(); ++j) {
      const std::int64_t aj = powi(ctx.p, f.domain.exponents[j]);
      // character coefficient c = m_ij * a_j / k_i mod a_j; integrality is
      // the order-compatibility already enforced by GroupHom
      const BigInt num = BigInt(f.matrix[i][j]) * aj;
      internalCheck(num % ki == 0, "hom matrix lost order compatibility");
      const std::int64_t c = static_cast<std::int64_t>(((num / ki) % aj + aj) % aj);
      if (c == 0) continue;
      const CohomologyClass term = mSeries(*table, c, CohomologyClass::generator(target, j));
      img = img.isZero() ? term : formalSum(*table, img, term);
    }
    images.push_back(std::move(img));
  }
  RingHom hom(source, target, images);
  // the [p^{k_i}]-series of each image must vanish, mirroring the source
  // relation [p^{k_i}](x_i) = 0; evaluated as k_i iterated p-series
  for (int i = 0; i < source->generators(); ++i) {
    CohomologyClass t = hom.generatorImages()[i];
    for (int s = 0; s < f.codomain.exponents[i] && !t.isZero(); ++s)
      t = mSeries(*table, ctx.p, t);
    internalCheck(t.isZero(), "generator image not killed by its p^k-series");
  }
  return hom;
}

bool fglAssociativityHolds(const FglTable& table, std::int64_t T) {
  const PrimeContext& ctx = table.ctx();
  require(T >= 2 && table.trunc() >= 2 * T - 1,
          "associativity block needs table truncation >= 2T-1");
  const std::int64_t p = ctx.p;
  const std::size_t block = static_cast<std::size_t>(T * T);
  // U = F(x,y) restricted to {i,j < T}
  std::vector<std::int64_t> U(block, 0);
  for (const FglTable::Entry& e : table.nonzero())
    if (e.i < T && e.j < T) U[static_cast<std::size_t>(e.i * T + e.j)] = e.c;

  auto mulBlock = [&](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    // entries lie in [0, p); raw products accumulate without overflow (at most
    // T^2 * p^2 per cell), reduced once at the end
    std::vector<std::int64_t> r(block, 0);
    for (std::int64_t i1 = 0; i1 < T; ++i1)
      for (std::int64_t j1 = 0; j1 < T; ++j1) {
        const std::int64_t av = a[static_cast<std::size_t>(i1 * T + j1)];
        if (av == 0) continue;
        for (std::int64_t i2 = 0; i1 + i2 < T; ++i2)
          for (std::int64_t j2 = 0; j1 + j2 < T; ++j2) {
            const std::int64_t bv = b[static_cast<std::size_t>(i2 * T + j2)];
            if (bv == 0) continue;
            r[static_cast<std::size_t>((i1 + i2) * T + (j1 + j2))] += av * bv;
          }
      }
    for (std::int64_t& v : r) v %= p;
    return r;
  };

  // L[a][b][c] from sum A_{ij} U^i z^j  (i can reach 2T-2),
  // R[a][b][c] from sum A_{ij} x^i V^j with V = F(y,z) = U in (y,z)
  std::vector<std::int64_t> L(block * static_cast<std::size_t>(T), 0), R = L;
  std::vector<std::int64_t> Upow(block, 0);
  Upow[0] = 1;  // U^0
  for (std::int64_t i = 0; i <= 2 * T - 2; ++i) {
    if (i > 0) {
      Upow = mulBlock(Upow, U);
      bool any = false;
      for (std::int64_t v : Upow)
        if (v) { any = true; break; }
      if (!any) break;
    }
    for (std::int64_t j = 0; j < T; ++j) {
      const std::int64_t A = table.coeff(i, j);
      if (A == 0) continue;
      // L += A * U^i (x) z^j
      for (std::int64_t a = 0; a < T; ++a)
        for (std::int64_t b = 0; b < T; ++b) {
          const std::int64_t uv = Upow[static_cast<std::size_t>(a * T + b)];
          if (uv == 0) continue;
          L[static_cast<std::size_t>((a * T + b) * T + j)] += A * uv;
        }
    }
  }
  std::vector<std::int64_t> Vpow(block, 0);
  Vpow[0] = 1;
  for (std::int64_t j = 0; j <= 2 * T - 2; ++j) {
    if (j > 0) {
      Vpow = mulBlock(Vpow, U);
      bool any = false;
      for (std::int64_t v : Vpow)
        if (v) { any = true; break; }
      if (!any) break;
    }
    for (std::int64_t i = 0; i < T; ++i) {
      const std::int64_t A = table.coeff(i, j);
      if (A == 0) continue;
      // R += A * x^i (x) V^j, V-power indexed by (b, c)
      for (std::int64_t b = 0; b < T; ++b)
        for (std::int64_t c = 0; c < T; ++c) {
          const std::int64_t vv = Vpow[static_cast<std::size_t>(b * T + c)];
          if (vv == 0) continue;
          R[static_cast<std::size_t>((i * T + b) * T + c)] += A * vv;
        }
    }
  }
  for (std::int64_t& v : L) v %= p;
  for (std::int64_t& v : R) v %= p;
  return L == R;
}

}  // namespace morava
