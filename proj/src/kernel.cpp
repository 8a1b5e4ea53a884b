#include "lrp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace lrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int32_t inf_norm(std::span<const std::int32_t> w) {
  std::int32_t m = 0;
  for (std::int32_t c : w) m = std::max(m, std::abs(c));
  return m;
}

// --- Gauss-Legendre nodes -------------------------------------------------

struct QuadRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

QuadRule make_gauss_legendre(int order) {
  QuadRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int k = 0; k < (order + 1) / 2; ++k) {
    double x = std::cos(M_PI * (k + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_order(x) and its derivative.
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(k)] = -x;
    rule.weights[static_cast<std::size_t>(k)] = w;
    rule.nodes[static_cast<std::size_t>(order - 1 - k)] = x;
    rule.weights[static_cast<std::size_t>(order - 1 - k)] = w;
  }
  return rule;
}

const QuadRule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::unordered_map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_gauss_legendre(order)).first;
  return it->second;
}

double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Integrand of the reduced form: the 2d-dimensional block-pair integral
// collapses to d dimensions because each coordinate difference s_i - t_i has
// the triangular density (1 - |z_i|) on [-1, 1]. The triangular factor is
// folded into the per-axis quadrature weights.
struct ReducedIntegrand {
  std::span<const std::int32_t> w;
  int dim;

  double operator()(std::span<const double> z) const {
    double sq = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double u = static_cast<double>(w[static_cast<std::size_t>(i)]) + z[static_cast<std::size_t>(i)];
      sq += u * u;
    }
    return 1.0 / ipow(sq, dim);
  }
};

// Tensor-product Gauss-Legendre over the box [lo, hi], with the triangular
// weight (1 - |z_i|) baked into the axis weights. Panels never straddle the
// kink at z_i = 0 (subdivision starts from the orthants).
double tensor_panel(const ReducedIntegrand& f, int order, std::span<const double> lo,
                    std::span<const double> hi) {
  const QuadRule& rule = gauss_legendre(order);
  const int d = f.dim;
  const std::size_t q = rule.nodes.size();

  // Mapped nodes and combined weights per axis.
  static thread_local std::vector<double> xs, ws;
  xs.assign(static_cast<std::size_t>(d) * q, 0.0);
  ws.assign(static_cast<std::size_t>(d) * q, 0.0);
  for (int i = 0; i < d; ++i) {
    const double c = 0.5 * (hi[static_cast<std::size_t>(i)] + lo[static_cast<std::size_t>(i)]);
    const double h = 0.5 * (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
    for (std::size_t k = 0; k < q; ++k) {
      const double z = c + h * rule.nodes[k];
      xs[static_cast<std::size_t>(i) * q + k] = z;
      ws[static_cast<std::size_t>(i) * q + k] = h * rule.weights[k] * (1.0 - std::abs(z));
    }
  }

  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> z(static_cast<std::size_t>(d));
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (int i = 0; i < d; ++i) {
      const std::size_t k = idx[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i) * q + k];
      weight *= ws[static_cast<std::size_t>(i) * q + k];
    }
    total += weight * f(z);
    int axis = d - 1;
    while (axis >= 0) {
      if (++idx[static_cast<std::size_t>(axis)] < q) break;
      idx[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return total;
}

struct Panel {
  std::vector<double> lo, hi;
  double tol;
  int depth;
};

double adaptive_reduced(const ReducedIntegrand& f, double abs_tol) {
  const int d = f.dim;
  // Seed with the 2^d orthants of [-1, 1]^d so the triangular kink lies only
  // on panel boundaries.
  std::vector<Panel> stack;
  const int orthants = 1 << d;
  for (int mask = 0; mask < orthants; ++mask) {
    Panel p;
    p.lo.resize(static_cast<std::size_t>(d));
    p.hi.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      const bool neg = (mask >> i) & 1;
      p.lo[static_cast<std::size_t>(i)] = neg ? -1.0 : 0.0;
      p.hi[static_cast<std::size_t>(i)] = neg ? 0.0 : 1.0;
    }
    p.tol = abs_tol / orthants;
    p.depth = 0;
    stack.push_back(std::move(p));
  }

  double total = 0.0;
  while (!stack.empty()) {
    Panel p = std::move(stack.back());
    stack.pop_back();
    const double coarse = tensor_panel(f, 12, p.lo, p.hi);
    const double fine = tensor_panel(f, 20, p.lo, p.hi);
    if (std::abs(fine - coarse) <= p.tol || p.depth >= 36) {
      total += fine;
      continue;
    }
    int axis = 0;
    double widest = 0.0;
    for (int i = 0; i < d; ++i) {
      const double width = p.hi[static_cast<std::size_t>(i)] - p.lo[static_cast<std::size_t>(i)];
      if (width > widest) {
        widest = width;
        axis = i;
      }
    }
    const double mid = 0.5 * (p.lo[static_cast<std::size_t>(axis)] + p.hi[static_cast<std::size_t>(axis)]);
    Panel left = p, right = p;
    left.hi[static_cast<std::size_t>(axis)] = mid;
    right.lo[static_cast<std::size_t>(axis)] = mid;
    left.tol = right.tol = 0.5 * p.tol;
    left.depth = right.depth = p.depth + 1;
    stack.push_back(std::move(left));
    stack.push_back(std::move(right));
  }
  return total;
}

double euclid_norm_sq(std::span<const std::int32_t> w) {
  double s = 0.0;
  for (std::int32_t c : w) s += static_cast<double>(c) * static_cast<double>(c);
  return s;
}

void check_displacement(const KernelSpec& spec, std::span<const std::int32_t> w) {
  if (static_cast<int>(w.size()) != spec.dim)
    throw std::invalid_argument("kernel: displacement dimension mismatch");
  if (inf_norm(w) == 0) throw std::domain_error("kernel: zero displacement");
}

}  // namespace

void KernelSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("kernel spec: dimension must be >= 1");
  if (!(beta >= 0.0)) throw std::invalid_argument("kernel spec: beta must be >= 0");
  if (variant == KernelVariant::kPowerLaw && !(power_exponent > 0.0))
    throw std::invalid_argument("kernel spec: power-law exponent must be > 0");
}

std::string KernelSpec::variant_token() const {
  if (variant == KernelVariant::kSelfSimilar) return "selfsim";
  char buf[48];
  std::snprintf(buf, sizeof buf, "power:%.17g", power_exponent);
  return buf;
}

std::vector<std::int32_t> canonical_displacement(std::span<const std::int32_t> w) {
  std::vector<std::int32_t> c(w.begin(), w.end());
  for (std::int32_t& v : c) v = std::abs(v);
  std::sort(c.begin(), c.end(), std::greater<>());
  return c;
}

double kernel_value(const KernelSpec& spec, std::span<const std::int32_t> w) {
  check_displacement(spec, w);
  if (inf_norm(w) == 1) return kInf;
  if (spec.variant == KernelVariant::kPowerLaw)
    return std::pow(euclid_norm_sq(w), -0.5 * spec.power_exponent);
  if (spec.dim == 1) {
    // Closed form of the block-pair integral in one dimension:
    // J(k) = log(k^2 / (k^2 - 1)).
    const double k = std::abs(w[0]);
    return std::log1p(1.0 / (k * k - 1.0));
  }
  // Canonicalize so permutation and sign-flip symmetry holds exactly.
  const auto c = canonical_displacement(w);
  return kernel_value_by_quadrature(spec, c, 1e-11);
}

double kernel_value_by_quadrature(const KernelSpec& spec, std::span<const std::int32_t> w,
                                  double abs_tol) {
  check_displacement(spec, w);
  if (spec.variant != KernelVariant::kSelfSimilar)
    throw std::invalid_argument("kernel quadrature: self-similar variant only");
  if (inf_norm(w) == 1) return kInf;
  ReducedIntegrand f{w, spec.dim};
  return adaptive_reduced(f, abs_tol);
}

double edge_probability_value(const KernelSpec& spec, std::span<const std::int32_t> w) {
  const double j = kernel_value(spec, w);
  if (std::isinf(j)) return 1.0;  // beta * infinity = infinity, even at beta = 0
  return -std::expm1(-spec.beta * j);
}

KernelTable::KernelTable(KernelSpec spec, std::int32_t radius) : spec_(spec), radius_(radius) {
  spec_.validate();
  if (radius < 1) throw std::invalid_argument("kernel table: radius must be >= 1");
  // Enumerate canonical displacement tuples c_0 >= c_1 >= ... >= 0, c_0 <= R.
  std::vector<std::int32_t> c(static_cast<std::size_t>(spec_.dim), 0);
  const int d = spec_.dim;
  while (true) {
    if (c[0] > 0) {
      const double jv = kernel_value(spec_, c);
      const double pv = std::isinf(jv) ? 1.0 : -std::expm1(-spec_.beta * jv);
      values_.emplace(c, std::make_pair(jv, pv));
    }
    int axis = d - 1;
    while (axis >= 0) {
      const std::int32_t cap = axis == 0 ? radius_ : c[static_cast<std::size_t>(axis - 1)];
      if (c[static_cast<std::size_t>(axis)] < cap) {
        ++c[static_cast<std::size_t>(axis)];
        for (int i = axis + 1; i < d; ++i) c[static_cast<std::size_t>(i)] = 0;
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }
}

double KernelTable::j(std::span<const std::int32_t> w) const {
  check_displacement(spec_, w);
  const auto c = canonical_displacement(w);
  auto it = values_.find(c);
  if (it != values_.end()) return it->second.first;
  return kernel_value(spec_, c);
}

double KernelTable::p(std::span<const std::int32_t> w) const {
  check_displacement(spec_, w);
  const auto c = canonical_displacement(w);
  auto it = values_.find(c);
  if (it != values_.end()) return it->second.second;
  return edge_probability_value(spec_, c);
}

std::vector<KernelTable::Entry> KernelTable::entries() const {
  std::vector<Entry> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_)
    out.push_back(Entry{key, value.first, value.second});
  return out;
}

DegreeEstimate expected_degree(const KernelTable& table, std::int32_t radius) {
  if (radius < 2) throw std::invalid_argument("expected_degree: radius must be >= 2");
  const KernelSpec& spec = table.spec();
  const int d = spec.dim;

  double mu = ipow(3.0, d) - 1.0;  // inf-norm nearest neighbors, always open

  // Sum p over 2 <= ||w||_inf <= R using canonical classes and their orbit
  // sizes under coordinate permutation and sign flips.
  std::vector<std::int32_t> c(static_cast<std::size_t>(d), 0);
  while (true) {
    if (c[0] >= 2) {
      // Orbit size: permutations of the multiset times sign choices.
      double perms = 1.0;
      for (int i = 1; i <= d; ++i) perms *= i;
      int nonzero = 0;
      for (int i = 0; i < d;) {
        int run = 1;
        while (i + run < d && c[static_cast<std::size_t>(i + run)] == c[static_cast<std::size_t>(i)]) ++run;
        for (int j = 2; j <= run; ++j) perms /= j;
        if (c[static_cast<std::size_t>(i)] != 0) nonzero += run;
        i += run;
      }
      const double orbit = perms * ipow(2.0, nonzero);
      mu += orbit * table.p(c);
    }
    int axis = d - 1;
    while (axis >= 0) {
      const std::int32_t cap = axis == 0 ? radius : c[static_cast<std::size_t>(axis - 1)];
      if (c[static_cast<std::size_t>(axis)] < cap) {
        ++c[static_cast<std::size_t>(axis)];
        for (int i = axis + 1; i < d; ++i) c[static_cast<std::size_t>(i)] = 0;
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }

  double tail;
  if (spec.variant == KernelVariant::kSelfSimilar && d == 1) {
    // The J tail telescopes exactly: sum_{|k| > R} J(k) = 2 log(1 + 1/R).
    tail = 2.0 * spec.beta * std::log1p(1.0 / radius);
  } else if (spec.variant == KernelVariant::kSelfSimilar) {
    // p(w) <= beta J(w), and the J tail is bounded by the integral of
    // |z|^(-2d) over ||z||_2 >= R-1: S_{d-1}/d * (R-1)^(-d).
    const double sphere = 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
    tail = spec.beta * (sphere / d) * std::pow(static_cast<double>(radius - 1), -d);
  } else {
    // Plain power law: compare with the integral over ||z||_2 >= R-1 when
    // s > d; infinite expected degree otherwise.
    const double s = spec.power_exponent;
    if (s <= d) {
      tail = kInf;
    } else {
      // 1 - e^(-beta J) <= beta J termwise; integral comparison on J = r^(-s).
      const double sphere = 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
      tail = spec.beta * sphere / (s - d) * std::pow(static_cast<double>(radius - 1), d - s);
    }
  }
  return DegreeEstimate{mu, tail};
}

double block_sum_j(const KernelSpec& spec, std::int32_t block_side,
                   std::span<const std::int32_t> coarse_w) {
  check_displacement(spec, coarse_w);
  if (block_side < 1) throw std::invalid_argument("block_sum_j: block side must be >= 1");
  if (inf_norm(coarse_w) < 2)
    throw std::invalid_argument("block_sum_j: coarse displacement must have inf-norm >= 2");
  const int d = spec.dim;
  const std::int32_t n = block_side;

  // Group fine pairs by their offset delta in [-(n-1), n-1]^d; the number of
  // pairs at offset delta is prod_i (n - |delta_i|).
  std::vector<std::int32_t> delta(static_cast<std::size_t>(d), -(n - 1));
  std::vector<std::int32_t> fine(static_cast<std::size_t>(d));
  double total = 0.0;
  while (true) {
    double count = 1.0;
    for (int i = 0; i < d; ++i) {
      count *= static_cast<double>(n - std::abs(delta[static_cast<std::size_t>(i)]));
      fine[static_cast<std::size_t>(i)] =
          n * coarse_w[static_cast<std::size_t>(i)] + delta[static_cast<std::size_t>(i)];
    }
    total += count * kernel_value(spec, fine);
    int axis = d - 1;
    while (axis >= 0) {
      if (delta[static_cast<std::size_t>(axis)] < n - 1) {
        ++delta[static_cast<std::size_t>(axis)];
        for (int i = axis + 1; i < d; ++i) delta[static_cast<std::size_t>(i)] = -(n - 1);
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }
  return total;
}

}  // namespace lrp
