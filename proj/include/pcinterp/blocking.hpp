#pragma once

#include <map>
#include <utility>
#include <vector>

#include "pcinterp/types.hpp"

namespace pcinterp {

// A maximal run of missing indices: {start, ..., start + len - 1}.
struct Interval {
  long start = 0;
  long len = 0;
};

// The missing-index set S as ordered disjoint intervals, with the period of
// the underlying sequence. The same type serves the scalar (PC-time) domain
// and the blocked vector domain; only the operations below care which one a
// pattern lives in.
class MissingPattern {
 public:
  MissingPattern(std::vector<Interval> intervals, int period = 1);

  const std::vector<Interval>& intervals() const { return intervals_; }
  int period() const { return period_; }

  long size() const;           // rho = N_1 + ... + N_s
  long first() const { return intervals_.front().start; }
  long last() const;
  bool contains(long j) const;
  std::vector<long> indices() const;

 private:
  std::vector<Interval> intervals_;
  int period_;
};

using ScalarCoeffs = std::map<long, cd>;
using VectorCoeffs = std::map<long, Vector>;

// a_nu(j) = a(j) e^{2 pi i j nu / T}, nu = 1..T.
VectorCoeffs lift_functional(const ScalarCoeffs& a, int period);

// PC-domain pattern with all interval offsets and lengths divisible by T
// -> blocked pattern {M_l/T, ..., M_l/T + N_{l+1}/T - 1}. The PC interval
// {M_l+1, ..., M_l+N} must therefore start at M_l+1 with T | M_l and T | N.
MissingPattern block_pattern(const MissingPattern& pc);

// Inverse of block_pattern: blocked interval {s, ..., s+l-1} back to the PC
// indices {sT+1, ..., (s+l)T}.
MissingPattern unblock_pattern(const MissingPattern& blocked);

// Scalar coefficients on S -> vector coefficients on the blocked pattern,
// component read-off a_nu(jt) = a(nu + jt*T).
VectorCoeffs block_functional(const ScalarCoeffs& a, const MissingPattern& pc);

// [zeta_vec(n)]_p = zeta(nT + p); the input is indexed 1..len.
std::vector<Vector> block_series(const std::vector<cd>& x, int period);
std::vector<cd> unblock_series(const std::vector<Vector>& x);

// Blocked (lag, component nu in 1..T) <-> PC index nu + lag*T.
long pc_index(long blocked_lag, int component, int period);
std::pair<long, int> blocked_index(long pc_j, int period);

}  // namespace pcinterp
