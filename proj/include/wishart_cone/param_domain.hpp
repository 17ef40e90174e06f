#pragma once

// Admissible Wishart parameters: the Gindikin set of shapes for a full-rank
// scale, its extension to degenerate scales through the rank, and the
// infinite-divisibility test.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "wishart_cone/errors.hpp"
#include "wishart_cone/psd_core.hpp"

namespace wishart_cone {

inline constexpr double kHalfIntegerTolerance = 1e-9;

enum class GindikinBranch { DiscretePoint, ContinuousRay, NotMember };

inline const char* to_string(GindikinBranch b) {
  switch (b) {
    case GindikinBranch::DiscretePoint: return "DiscretePoint";
    case GindikinBranch::ContinuousRay: return "ContinuousRay";
    case GindikinBranch::NotMember: return "NotMember";
  }
  return "Unknown";
}

struct GindikinVerdict {
  Index dim = 1;
  double shape = 0.0;
  bool member = false;
  GindikinBranch branch = GindikinBranch::NotMember;
  int point_index = 0;  // j of the discrete point j/2; 0 off that branch
  double half_integer_tolerance = kHalfIntegerTolerance;

  std::string describe() const {
    if (branch == GindikinBranch::DiscretePoint) {
      return "DiscretePoint(" + std::to_string(point_index) + ")";
    }
    return to_string(branch);
  }
};

/// Membership of p in {j/2 : j = 1..d-2} u [(d-1)/2, inf). The tolerance is
/// absolute on 2p, for both the discrete points and the ray endpoint.
inline GindikinVerdict gindikin_contains(Index d, double p,
                                         double half_integer_tolerance = kHalfIntegerTolerance) {
  if (d < 1) throw Error(ErrorCode::InvalidDimension, "dimension must be >= 1");
  if (!std::isfinite(p)) throw Error(ErrorCode::NonFinite, "shape must be finite");

  GindikinVerdict v{d, p, false, GindikinBranch::NotMember, 0, half_integer_tolerance};
  if (p <= 0.0) return v;

  const double two_p = 2.0 * p;
  if (d == 1 || two_p >= static_cast<double>(d - 1) - half_integer_tolerance) {
    v.member = true;
    v.branch = GindikinBranch::ContinuousRay;
    return v;
  }
  const double j = std::round(two_p);
  if (j >= 1.0 && j <= static_cast<double>(d - 2) && std::abs(two_p - j) <= half_integer_tolerance) {
    v.member = true;
    v.branch = GindikinBranch::DiscretePoint;
    v.point_index = static_cast<int>(j);
  }
  return v;
}

/// A shape/scale pair with its existence certificate. Only theta_contains
/// and divide build these.
struct WishartSpec {
  double shape = 0.0;
  ScaleFactorization scale;
  bool exists = false;
  bool infinitely_divisible = false;
  GindikinVerdict verdict;

  Index dim() const { return scale.dim(); }
  Index rank() const { return scale.rank; }
};

/// Existence is decided by the rank of the scale alone: p must lie in the
/// Gindikin set of dimension rank(sigma).
inline WishartSpec theta_contains(double p, const ScaleFactorization& scale) {
  if (!std::isfinite(p)) throw Error(ErrorCode::NonFinite, "shape must be finite");
  if (p <= 0.0) {
    throw Error(ErrorCode::TrivialParameter, "shape must be > 0 (the point mass at zero is excluded)");
  }
  if (scale.rank == 0) {
    throw Error(ErrorCode::TrivialParameter, "scale matrix is zero (the point mass at zero is excluded)");
  }
  WishartSpec spec{p, scale, false, false, gindikin_contains(scale.rank, p)};
  spec.exists = spec.verdict.member;
  spec.infinitely_divisible = spec.exists && scale.rank == 1;
  return spec;
}

inline WishartSpec theta_contains(double p, const SymMatrix& sigma,
                                  double rank_tolerance = kDefaultRankTolerance) {
  if (!std::isfinite(p)) throw Error(ErrorCode::NonFinite, "shape must be finite");
  return theta_contains(p, spectral_factorize(sigma, rank_tolerance));
}

inline void require_exists(const WishartSpec& spec) {
  if (!spec.exists) {
    throw Error(ErrorCode::NonExistent, "shape " + std::to_string(spec.shape) +
                                            " is not in the Gindikin set of rank " +
                                            std::to_string(spec.rank()));
  }
}

inline bool is_infinitely_divisible(const WishartSpec& spec) {
  require_exists(spec);
  return spec.scale.rank == 1;
}

/// The n-th convolution root Gamma(p/n; sigma), when it exists.
inline WishartSpec divide(const WishartSpec& spec, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "divide: n must be >= 1");
  require_exists(spec);
  if (n == 1) return spec;
  WishartSpec root = theta_contains(spec.shape / n, spec.scale);
  if (!root.exists) {
    throw Error(ErrorCode::NonExistent, "p/n = " + std::to_string(root.shape) +
                                            " is not in the Gindikin set of rank " +
                                            std::to_string(spec.rank()) + " (n = " +
                                            std::to_string(n) + ")");
  }
  return root;
}

/// Smallest n for which divide(spec, n) is refused; none for rank one.
inline std::optional<long> first_refused_division(const WishartSpec& spec) {
  require_exists(spec);
  const Index r = spec.rank();
  if (r == 1) return std::nullopt;
  // p/n stays on the ray while n <= 2p / (r-1); past that only the r-2
  // discrete points can be hit, so the scan below is short.
  const double ray_end = 2.0 * spec.shape / static_cast<double>(r - 1);
  long n = std::max(1L, static_cast<long>(std::floor(ray_end)) - 1);
  while (gindikin_contains(r, spec.shape / static_cast<double>(n)).member) ++n;
  return n;
}

}  // namespace wishart_cone
