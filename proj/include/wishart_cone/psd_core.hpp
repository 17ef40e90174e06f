#pragma once

// Symmetric matrices on the PSD cone and the structural maps between cones:
// spectral factorization with rank detection, leading-block projection,
// zero-padding embedding and orthogonal conjugation.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wishart_cone/errors.hpp"

namespace wishart_cone {

using Index = Eigen::Index;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kOrthogonalityTolerance = 1e-12;
inline constexpr double kDefaultRankTolerance = 1e-10;

/// Dense real symmetric matrix. Entries (i,j) and (j,i) are bitwise equal.
class SymMatrix {
 public:
  /// Accepts a square matrix whose asymmetry is at most 1e-12 relative to its
  /// largest entry and stores (a + a^T) / 2.
  explicit SymMatrix(const Eigen::MatrixXd& a) : m_(checked(a)) {}

  static SymMatrix zero(Index d) { return SymMatrix(Eigen::MatrixXd::Zero(d, d)); }
  static SymMatrix identity(Index d) { return SymMatrix(Eigen::MatrixXd::Identity(d, d)); }
  static SymMatrix diagonal(const Eigen::VectorXd& diag) {
    return SymMatrix(Eigen::MatrixXd(diag.asDiagonal()));
  }

  /// Symmetrizes a computed product without the tolerance check. For
  /// internal results whose asymmetry is round-off by construction.
  static SymMatrix symmetrize(const Eigen::MatrixXd& a) {
    require_square(a);
    SymMatrix out;
    out.m_ = 0.5 * (a + a.transpose());
    return out;
  }

  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Eigen::MatrixXd& dense() const { return m_; }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

 private:
  SymMatrix() = default;

  static void require_square(const Eigen::MatrixXd& a) {
    if (a.rows() < 1 || a.rows() != a.cols()) {
      throw Error(ErrorCode::DimensionError, "symmetric matrix must be square with dim >= 1, got " +
                                                 std::to_string(a.rows()) + "x" +
                                                 std::to_string(a.cols()));
    }
  }

  static Eigen::MatrixXd checked(const Eigen::MatrixXd& a) {
    require_square(a);
    if (!a.allFinite()) throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
      throw Error(ErrorCode::NotSymmetric,
                  "asymmetry " + std::to_string(asym) + " exceeds tolerance relative to scale " +
                      std::to_string(scale));
    }
    return 0.5 * (a + a.transpose());
  }

  Eigen::MatrixXd m_;
};

/// tr(a b) for symmetric a, b.
inline double trace_product(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionError, "trace_product: dimension mismatch");
  return a.dense().cwiseProduct(b.dense()).sum();
}

inline Eigen::VectorXd eigenvalues(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.dense(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

struct PsdCheck {
  SymMatrix matrix;
  double min_eigenvalue;
  bool is_psd;
  double tolerance_used;
};

inline PsdCheck psd_check(const SymMatrix& a, double tolerance = kDefaultRankTolerance) {
  const Eigen::VectorXd ev = eigenvalues(a);
  const double min_ev = ev.minCoeff();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return PsdCheck{a, min_ev, min_ev >= -tolerance * scale, tolerance};
}

/// Factorization u_orth * sigma * u_orth^T = diag(eigs), eigenvalues sorted
/// descending and truncated to zero below rank_tolerance * eigs[0].
/// Rows of u_orth are eigenvectors of sigma.
struct ScaleFactorization {
  SymMatrix sigma;
  Eigen::MatrixXd u_orth;
  Eigen::VectorXd eigs;
  Index rank = 0;
  double rank_tolerance = kDefaultRankTolerance;

  Index dim() const { return sigma.dim(); }

  /// The positive block D of diag(D, 0).
  Eigen::VectorXd leading_eigs() const { return eigs.head(rank); }

  /// Orthonormal basis of range(sigma) as columns (d x rank).
  Eigen::MatrixXd range_basis() const { return u_orth.topRows(rank).transpose(); }

  /// Orthogonal projector onto range(sigma).
  Eigen::MatrixXd range_projector() const {
    const Eigen::MatrixXd b = range_basis();
    return b * b.transpose();
  }

  /// sigma^{1/2} built from the truncated spectrum.
  Eigen::MatrixXd sqrt_sigma() const {
    return u_orth.transpose() * eigs.cwiseSqrt().asDiagonal() * u_orth;
  }
};

inline ScaleFactorization spectral_factorize(const SymMatrix& sigma,
                                             double rank_tolerance = kDefaultRankTolerance) {
  if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "rank_tolerance must lie in (0, 1)");
  }
  const Index d = sigma.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.dense());
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFinite, "eigendecomposition failed");
  }
  // Eigen sorts ascending.
  const Eigen::VectorXd asc = es.eigenvalues();
  const double largest = asc(d - 1);
  const double smallest = asc(0);
  if (smallest < -rank_tolerance * std::max(largest, 0.0)) {
    throw Error(ErrorCode::NotPsd, "scale matrix has eigenvalue " + std::to_string(smallest));
  }

  ScaleFactorization f{sigma, Eigen::MatrixXd(d, d), Eigen::VectorXd::Zero(d), 0, rank_tolerance};
  const double cutoff = rank_tolerance * largest;
  for (Index i = 0; i < d; ++i) {
    const Index src = d - 1 - i;
    f.u_orth.row(i) = es.eigenvectors().col(src).transpose();
    const double lambda = asc(src);
    if (largest > 0.0 && lambda > cutoff) {
      f.eigs(i) = lambda;
      ++f.rank;
    }
  }
  return f;
}

/// Leading principal r x r block.
inline SymMatrix project(const SymMatrix& a, Index r) {
  if (r < 1 || r > a.dim()) {
    throw Error(ErrorCode::DimensionError, "project: r = " + std::to_string(r) +
                                               " outside [1, " + std::to_string(a.dim()) + "]");
  }
  return SymMatrix::symmetrize(a.dense().topLeftCorner(r, r));
}

/// diag(a, 0) in dimension d.
inline SymMatrix embed(const SymMatrix& a, Index d) {
  if (a.dim() > d) {
    throw Error(ErrorCode::DimensionError, "embed: source dim " + std::to_string(a.dim()) +
                                               " exceeds target dim " + std::to_string(d));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  out.topLeftCorner(a.dim(), a.dim()) = a.dense();
  return SymMatrix::symmetrize(out);
}

inline bool is_orthogonal(const Eigen::MatrixXd& u, double tolerance = kOrthogonalityTolerance) {
  if (u.rows() != u.cols()) return false;
  const Index d = u.rows();
  return (u.transpose() * u - Eigen::MatrixXd::Identity(d, d)).norm() <= tolerance;
}

namespace detail {
inline SymMatrix conjugate_unchecked(const Eigen::MatrixXd& xi, const Eigen::MatrixXd& u) {
  return SymMatrix::symmetrize(u * xi * u.transpose());
}
}  // namespace detail

/// u * xi * u^T.
inline SymMatrix conjugate(const SymMatrix& xi, const Eigen::MatrixXd& u_orth) {
  if (u_orth.rows() != xi.dim() || u_orth.cols() != xi.dim()) {
    throw Error(ErrorCode::DimensionError, "conjugate: dimension mismatch");
  }
  if (!is_orthogonal(u_orth)) {
    throw Error(ErrorCode::NotOrthogonal, "conjugate: matrix is not orthogonal within 1e-12");
  }
  return detail::conjugate_unchecked(xi.dense(), u_orth);
}

/// Numerical rank with the same relative truncation rule as spectral_factorize.
inline Index numerical_rank(const SymMatrix& a, double rank_tolerance = kDefaultRankTolerance) {
  const Eigen::VectorXd ev = eigenvalues(a);
  const double largest = ev.cwiseAbs().maxCoeff();
  if (largest == 0.0) return 0;
  return (ev.cwiseAbs().array() > rank_tolerance * largest).count();
}

}  // namespace wishart_cone
