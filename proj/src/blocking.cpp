#include "pcinterp/blocking.hpp"

#include <cmath>

namespace pcinterp {

MissingPattern::MissingPattern(std::vector<Interval> intervals, int period)
    : intervals_(std::move(intervals)), period_(period) {
  if (period_ < 1) throw SchemaError("pattern period must be positive");
  if (intervals_.empty()) throw SchemaError("pattern needs at least one interval");
  long prev_end = 0;
  for (size_t l = 0; l < intervals_.size(); ++l) {
    if (intervals_[l].len < 1)
      throw SchemaError("pattern interval lengths must be positive");
    if (l > 0 && intervals_[l].start <= prev_end + 1)
      throw SchemaError("pattern intervals must be increasing with gaps >= 1");
    prev_end = intervals_[l].start + intervals_[l].len - 1;
  }
}

long MissingPattern::size() const {
  long rho = 0;
  for (const auto& iv : intervals_) rho += iv.len;
  return rho;
}

long MissingPattern::last() const {
  const auto& iv = intervals_.back();
  return iv.start + iv.len - 1;
}

bool MissingPattern::contains(long j) const {
  for (const auto& iv : intervals_)
    if (j >= iv.start && j < iv.start + iv.len) return true;
  return false;
}

std::vector<long> MissingPattern::indices() const {
  std::vector<long> out;
  out.reserve(size());
  for (const auto& iv : intervals_)
    for (long j = iv.start; j < iv.start + iv.len; ++j) out.push_back(j);
  return out;
}

namespace {

// e^{2 pi i num/den} with exact values at quarter turns, so identity and
// sign phases carry no rounding dust.
cd unit_root(long num, long den) {
  long m = ((num % den) + den) % den;
  if (4 * m % den == 0) {
    switch (4 * m / den) {
      case 0:
        return {1.0, 0.0};
      case 1:
        return {0.0, 1.0};
      case 2:
        return {-1.0, 0.0};
      default:
        return {0.0, -1.0};
    }
  }
  double angle = 2.0 * kPi * static_cast<double>(m) / den;
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

VectorCoeffs lift_functional(const ScalarCoeffs& a, int period) {
  if (period < 1) throw SchemaError("period must be positive");
  VectorCoeffs out;
  for (const auto& [j, value] : a) {
    Vector v(period);
    for (int nu = 1; nu <= period; ++nu)
      v(nu - 1) = value * unit_root(j * nu, period);
    out[j] = v;
  }
  return out;
}

MissingPattern block_pattern(const MissingPattern& pc) {
  const long t = pc.period();
  std::vector<Interval> blocked;
  for (const auto& iv : pc.intervals()) {
    long offset = iv.start - 1;  // M_l for the interval {M_l+1, ...}
    if (offset % t != 0 || iv.len % t != 0)
      throw NotBlockable("interval offsets and lengths must be multiples of T");
    blocked.push_back({offset / t, iv.len / t});
  }
  return MissingPattern(std::move(blocked), pc.period());
}

MissingPattern unblock_pattern(const MissingPattern& blocked) {
  const long t = blocked.period();
  std::vector<Interval> pc;
  for (const auto& iv : blocked.intervals())
    pc.push_back({iv.start * t + 1, iv.len * t});
  return MissingPattern(std::move(pc), blocked.period());
}

VectorCoeffs block_functional(const ScalarCoeffs& a, const MissingPattern& pc) {
  MissingPattern blocked = block_pattern(pc);
  const int t = pc.period();

  long expected = pc.size();
  if (static_cast<long>(a.size()) != expected)
    throw SchemaError("functional support must equal the missing set");
  for (const auto& [j, value] : a)
    if (!pc.contains(j))
      throw SchemaError("functional coefficient outside the missing set");

  VectorCoeffs out;
  for (long jt : blocked.indices()) {
    Vector v(t);
    for (int nu = 1; nu <= t; ++nu) v(nu - 1) = a.at(pc_index(jt, nu, t));
    out[jt] = v;
  }
  return out;
}

std::vector<Vector> block_series(const std::vector<cd>& x, int period) {
  if (period < 1) throw SchemaError("period must be positive");
  if (x.size() % period != 0)
    throw SchemaError("series length must be a multiple of the period");
  std::vector<Vector> out(x.size() / period, Vector(period));
  for (size_t n = 0; n < out.size(); ++n)
    for (int p = 0; p < period; ++p) out[n](p) = x[n * period + p];
  return out;
}

std::vector<cd> unblock_series(const std::vector<Vector>& x) {
  if (x.empty()) return {};
  int period = static_cast<int>(x[0].size());
  std::vector<cd> out;
  out.reserve(x.size() * period);
  for (const auto& v : x)
    for (int p = 0; p < period; ++p) out.push_back(v(p));
  return out;
}

long pc_index(long blocked_lag, int component, int period) {
  return blocked_lag * period + component;
}

std::pair<long, int> blocked_index(long pc_j, int period) {
  // j = nu + jt*T with nu in 1..T; j divisible by T maps to nu = T,
  // jt = j/T - 1.
  long jt = (pc_j - 1) >= 0 ? (pc_j - 1) / period
                            : -(((-(pc_j - 1)) + period - 1) / period);
  int nu = static_cast<int>(pc_j - jt * period);
  return {jt, nu};
}

}  // namespace pcinterp
