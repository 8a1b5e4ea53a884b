#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lrp {

enum class KernelVariant { kSelfSimilar, kPowerLaw };

// Connection kernel parameters. The self-similar variant is the main object:
// J(w) is the integral of |x-y|^(-2d) over the unit blocks anchored at 0 and
// w, which diverges exactly on inf-norm nearest neighbors. The plain power
// law |w|^(-s) is kept as a contrast option.
struct KernelSpec {
  int dim = 1;
  double beta = 1.0;
  KernelVariant variant = KernelVariant::kSelfSimilar;
  double power_exponent = 0.0;  // s, only for kPowerLaw

  void validate() const;
  std::string variant_token() const;  // "selfsim" or "power:<s>"
  bool operator==(const KernelSpec&) const = default;
};

// Absolute coordinates sorted descending. J is invariant under coordinate
// permutations and sign flips, so this is the cache key.
std::vector<std::int32_t> canonical_displacement(std::span<const std::int32_t> w);

// J(w). Returns +infinity iff ||w||_inf == 1. Throws on w == 0.
// d = 1 uses the closed form log(k^2 / (k^2 - 1)); d >= 2 uses deterministic
// adaptive Gauss-Legendre quadrature with absolute error <= 1e-10.
double kernel_value(const KernelSpec& spec, std::span<const std::int32_t> w);

// Quadrature evaluation for any dimension including d = 1, exposed so tests
// can cross-check the closed form against the generic integration path.
// Self-similar variant only.
double kernel_value_by_quadrature(const KernelSpec& spec, std::span<const std::int32_t> w,
                                  double abs_tol = 1e-11);

// 1 - exp(-beta J(w)); exactly 1 on inf-norm nearest neighbors (for any beta,
// since beta * infinity = infinity by convention).
double edge_probability_value(const KernelSpec& spec, std::span<const std::int32_t> w);

// Precomputed (J, p) per canonical displacement class with ||w||_inf up to
// the build radius. Immutable after construction; concurrent reads are safe.
// Displacements beyond the radius are evaluated on the fly without caching.
class KernelTable {
 public:
  KernelTable(KernelSpec spec, std::int32_t radius);

  const KernelSpec& spec() const { return spec_; }
  std::int32_t radius() const { return radius_; }

  double j(std::span<const std::int32_t> w) const;
  double p(std::span<const std::int32_t> w) const;

  struct Entry {
    std::vector<std::int32_t> canonical;
    double j;
    double p;
  };
  // Entries in lexicographic canonical order (for the CSV dump).
  std::vector<Entry> entries() const;

 private:
  KernelSpec spec_;
  std::int32_t radius_;
  std::map<std::vector<std::int32_t>, std::pair<double, double>> values_;
};

struct DegreeEstimate {
  double mu;          // (3^d - 1) + sum of p(w) over 2 <= ||w||_inf <= R
  double tail_bound;  // rigorous upper bound on the omitted sum
};

// Expected degree truncated at inf-norm radius R (R >= 2), plus a bound on
// the tail. The tail uses p(w) <= beta*J(w) and an integral comparison:
// in d = 1 the J-tail telescopes to 2*log(1 + 1/R); in d >= 2 it is bounded
// by (surface of unit sphere)/d * (R-1)^(-d).
DegreeEstimate expected_degree(const KernelTable& table, std::int32_t radius);

// Sum of J over all fine pairs between the blocks n*0 + [0,n)^d and
// n*w + [0,n)^d, computed by grouping fine displacements. For the
// self-similar kernel this equals J(w) exactly (change of variables in the
// defining integral); the identity is what the renormalization checks test.
double block_sum_j(const KernelSpec& spec, std::int32_t block_side,
                   std::span<const std::int32_t> coarse_w);

}  // namespace lrp
