#include "pcinterp/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace pcinterp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double u64_to_unit(std::uint64_t x) {
  // 53 uniform bits in (0, 1]; never exactly 0 so log() is safe.
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

const VarSpec* as_var(const GeneratorSpec& spec) {
  return std::get_if<VarSpec>(&spec.model);
}

VarSpec scalar_pc_as_var(const ScalarPcSpec& pc) {
  // Independent scalar ARs stack into a diagonal VAR.
  size_t order = 0;
  for (const auto& comp : pc.components)
    order = std::max(order, comp.size());
  int dim = static_cast<int>(pc.components.size());
  VarSpec var;
  var.q.resize(order, Matrix::Zero(dim, dim));
  for (int nu = 0; nu < dim; ++nu)
    for (size_t k = 0; k < pc.components[nu].size(); ++k)
      var.q[k](nu, nu) = pc.components[nu][k];
  return var;
}

VarSpec effective_var(const GeneratorSpec& spec) {
  if (const auto* v = as_var(spec)) return *v;
  return scalar_pc_as_var(std::get<ScalarPcSpec>(spec.model));
}

void check_var_stability(const VarSpec& var) {
  if (var.q.empty()) throw SchemaError("VAR needs Q(0)");
  const int dim = static_cast<int>(var.q[0].rows());
  Eigen::FullPivLU<Matrix> lu(var.q[0]);
  if (!lu.isInvertible()) throw UnstableModel("Q(0) must be invertible");
  const int p = static_cast<int>(var.q.size()) - 1;
  if (p == 0) return;
  Matrix companion = Matrix::Zero(p * dim, p * dim);
  Matrix q0inv = lu.inverse();
  for (int k = 1; k <= p; ++k)
    companion.block(0, (k - 1) * dim, dim, dim) = -q0inv * var.q[k];
  for (int k = 1; k < p; ++k)
    companion.block(k * dim, (k - 1) * dim, dim, dim) =
        Matrix::Identity(dim, dim);
  double radius = companion.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0))
    throw UnstableModel("VAR companion spectral radius " +
                        std::to_string(radius) + " >= 1");
}

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0x2545f4914f6cdd1dULL * (stream + 1));
  splitmix64(state);
  return splitmix64(state);
}

NormalStream::NormalStream(std::uint64_t seed) : state_(seed) {
  // decorrelate trivially related seeds
  splitmix64(state_);
}

std::uint64_t NormalStream::next_u64() { return splitmix64(state_); }

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = u64_to_unit(next_u64());
  double u2 = u64_to_unit(next_u64());
  double r = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * kPi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

cd NormalStream::next_complex() {
  const double s = std::sqrt(0.5);
  return cd(s * next(), s * next());
}

int generator_dim(const GeneratorSpec& spec) {
  if (const auto* v = std::get_if<VarSpec>(&spec.model))
    return static_cast<int>(v->q.at(0).rows());
  if (const auto* m = std::get_if<MaSpec>(&spec.model))
    return static_cast<int>(m->theta.at(0).rows());
  return static_cast<int>(std::get<ScalarPcSpec>(spec.model).components.size());
}

void validate_generator(const GeneratorSpec& spec) {
  if (spec.burn_in < 0) throw SchemaError("burn-in must be nonnegative");
  if (std::get_if<MaSpec>(&spec.model)) {
    if (std::get<MaSpec>(spec.model).theta.empty())
      throw SchemaError("MA needs Theta(0)");
    return;
  }
  check_var_stability(effective_var(spec));
}

std::vector<Vector> generate(const GeneratorSpec& spec, long n) {
  validate_generator(spec);
  const int dim = generator_dim(spec);
  NormalStream rng(spec.seed);
  auto draw = [&]() {
    Vector e(dim);
    for (int i = 0; i < dim; ++i)
      e(i) = spec.complex_noise ? rng.next_complex() : cd(rng.next(), 0.0);
    return e;
  };

  if (const auto* m = std::get_if<MaSpec>(&spec.model)) {
    const int q = static_cast<int>(m->theta.size()) - 1;
    std::vector<Vector> eps(n + q);
    for (auto& e : eps) e = draw();
    std::vector<Vector> out(n);
    for (long t = 0; t < n; ++t) {
      Vector x = Vector::Zero(dim);
      for (int k = 0; k <= q; ++k) x += m->theta[k] * eps[t + q - k];
      out[t] = x;
    }
    return out;
  }

  VarSpec var = effective_var(spec);
  const int p = static_cast<int>(var.q.size()) - 1;
  Matrix q0inv = var.q[0].inverse();
  std::vector<Matrix> a(p);
  for (int k = 1; k <= p; ++k) a[k - 1] = -q0inv * var.q[k];

  std::vector<Vector> hist(std::max(p, 1), Vector::Zero(dim));
  std::vector<Vector> out;
  out.reserve(n);
  const long total = spec.burn_in + n;
  for (long t = 0; t < total; ++t) {
    Vector x = q0inv * draw();
    for (int k = 1; k <= p; ++k) {
      long idx = t - k;
      if (idx < 0) continue;  // zero prehistory
      x += a[k - 1] * hist[idx % p];
    }
    if (p > 0) hist[t % p] = x;
    if (t >= spec.burn_in) out.push_back(x);
  }
  return out;
}

std::vector<cd> generate_pc(const GeneratorSpec& spec, long n_blocks) {
  return unblock_series(generate(spec, n_blocks));
}

DensitySpec generator_density(const GeneratorSpec& spec) {
  if (const auto* m = std::get_if<MaSpec>(&spec.model))
    return DensitySpec::moving_average(m->theta);
  VarSpec var = effective_var(spec);
  check_var_stability(var);
  const int dim = static_cast<int>(var.q[0].rows());
  const int p = static_cast<int>(var.q.size()) - 1;
  // f^{-1} = Q(e^{i.})^* Q(e^{i.}): coefficient of e^{i m lambda} is
  // sum_l Q(l+m)^* Q(l).
  TrigMatrixPoly inv(dim);
  for (int m = 0; m <= p; ++m) {
    Matrix acc = Matrix::Zero(dim, dim);
    for (int l = 0; l + m <= p; ++l) acc += var.q[l + m].adjoint() * var.q[l];
    inv.set_pair(m, acc);
  }
  return DensitySpec::inverse_trig(inv);
}

EmpiricalMseReport empirical_mse(const GeneratorSpec& gen,
                                 const GeneratorSpec* noise,
                                 const MissingPattern& pattern,
                                 const VectorCoeffs& a,
                                 const std::map<long, Vector>& taps,
                                 double analytic_delta, long trials,
                                 std::uint64_t seed,
                                 std::vector<double>* per_trial) {
  if (trials < 1) throw SchemaError("need at least one trial");
  validate_generator(gen);
  if (noise) validate_generator(*noise);
  const int dim = generator_dim(gen);
  if (noise && generator_dim(*noise) != dim)
    throw DimensionMismatch("noise generator dimension mismatch");
  for (const auto& [j, av] : a)
    if (av.size() != dim)
      throw DimensionMismatch("functional dimension does not match generator");
  for (const auto& [j, h] : taps)
    if (h.size() != dim)
      throw DimensionMismatch("tap dimension does not match generator");

  long lo = pattern.first();
  long hi = pattern.last();
  for (const auto& [j, h] : taps) {
    lo = std::min(lo, j);
    hi = std::max(hi, j);
  }
  const long span = hi - lo + 1;

  if (per_trial) {
    per_trial->clear();
    per_trial->reserve(trials);
  }
  double mean = 0.0;
  double m2 = 0.0;
  for (long trial = 0; trial < trials; ++trial) {
    GeneratorSpec g = gen;
    g.seed = split_seed(seed, 2 * trial);
    auto series = generate(g, span);

    std::vector<Vector> noise_series;
    if (noise) {
      GeneratorSpec ns = *noise;
      ns.seed = split_seed(seed, 2 * trial + 1);
      noise_series = generate(ns, span);
    }

    cd target(0.0, 0.0);
    for (const auto& [j, av] : a)
      target += (av.array() * series[j - lo].array()).sum();

    cd estimate(0.0, 0.0);
    for (const auto& [j, h] : taps) {
      if (pattern.contains(j)) continue;
      Vector obs = series[j - lo];
      if (noise) obs += noise_series[j - lo];
      estimate += (h.array() * obs.array()).sum();
    }

    double err = std::norm(target - estimate);
    if (per_trial) per_trial->push_back(err);
    double delta = err - mean;
    mean += delta / static_cast<double>(trial + 1);
    m2 += delta * (err - mean);
  }

  EmpiricalMseReport rep;
  rep.trials = trials;
  rep.mean = mean;
  rep.analytic = analytic_delta;
  double variance = trials > 1 ? m2 / static_cast<double>(trials - 1) : 0.0;
  rep.standard_error = std::sqrt(variance / static_cast<double>(trials));
  rep.z = rep.standard_error > 0.0
              ? (rep.mean - analytic_delta) / rep.standard_error
              : 0.0;
  return rep;
}

}  // namespace pcinterp
