#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "pcinterp/interp.hpp"

namespace pcinterp {

// sum_k Q(k) x(n-k) = eps(n) with unit-covariance white noise.
struct VarSpec {
  std::vector<Matrix> q;  // q[0..p], q[0] invertible
};

// x(n) = sum_k Theta(k) eps(n-k).
struct MaSpec {
  std::vector<Matrix> theta;  // theta[0..q]
};

// Scalar T-PC sequence assembled from independent per-component scalar AR
// models: component nu of the blocked sequence obeys
// sum_k q_nu(k) x(n-k) = eps(n).
struct ScalarPcSpec {
  std::vector<std::vector<cd>> components;  // one coefficient list per component
};

// Innovations are circularly symmetric complex Gaussian by default; real
// coefficient models can opt into real noise.
struct GeneratorSpec {
  std::variant<VarSpec, MaSpec, ScalarPcSpec> model;
  std::uint64_t seed = 1;
  int burn_in = 1024;
  bool complex_noise = true;
};

int generator_dim(const GeneratorSpec& spec);

// Stability/shape validation; throws UnstableModel or SchemaError.
void validate_generator(const GeneratorSpec& spec);

// n post-burn-in samples of the T-variate sequence; bit-reproducible for a
// given spec and seed.
std::vector<Vector> generate(const GeneratorSpec& spec, long n);
// The scalar PC view, length n*T, indexed as zeta(1..nT).
std::vector<cd> generate_pc(const GeneratorSpec& spec, long n_blocks);

// Exact spectral density of the generated sequence. VAR densities come out in
// inverse-trig form with coefficients sum_l Q(l+m)^* Q(l); MA densities in
// moving-average form.
DensitySpec generator_density(const GeneratorSpec& spec);

struct EmpiricalMseReport {
  long trials = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double analytic = 0.0;
  double z = 0.0;
};

// Monte Carlo estimate of E|A_s zeta - hat A_s zeta|^2 for the filter in
// `taps`, with per-trial RNG streams split from `seed`. When `per_trial` is
// given it receives the individual squared errors.
EmpiricalMseReport empirical_mse(const GeneratorSpec& gen,
                                 const GeneratorSpec* noise,
                                 const MissingPattern& pattern,
                                 const VectorCoeffs& a,
                                 const std::map<long, Vector>& taps,
                                 double analytic_delta, long trials,
                                 std::uint64_t seed,
                                 std::vector<double>* per_trial = nullptr);

// Deterministic normal stream: SplitMix64-seeded mt19937_64 driving an
// explicit Box-Muller transform, so series are reproducible across platforms.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed);
  double next();      // N(0, 1)
  cd next_complex();  // circularly symmetric, E|z|^2 = 1

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint64_t next_u64();
};

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pcinterp
