#pragma once

// Samplers for Gamma(p; sigma) on every admissible (p, sigma).
//
// Every sample index i draws from its own substream StreamRng(seed, 1, i), so a
// batch is a pure function of (spec, n, seed) whatever the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "wishart_cone/errors.hpp"
#include "wishart_cone/param_domain.hpp"
#include "wishart_cone/psd_core.hpp"
#include "wishart_cone/rng.hpp"
#include "wishart_cone/sample_batch.hpp"

namespace wishart_cone {

inline constexpr std::uint64_t kSampleStream = 1;

/// Worker count from WISHART_CONE_THREADS, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("WISHART_CONE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct SamplerOptions {
  unsigned workers = default_workers();
};

namespace detail {

inline std::string stream_layout(std::uint64_t seed) {
  return "xoshiro256** per sample index i, state = splitmix64 chain of (seed=" +
         std::to_string(seed) + ", stream=1, index=i)";
}

/// Applies fn(i) for i in [0, n) on contiguous chunks, one per worker.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t w = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// draw(rng) -> Eigen::MatrixXd for each index, assembled in index order.
template <class Draw>
std::vector<SymMatrix> draw_batch(std::size_t n, std::uint64_t seed, unsigned workers, Draw&& draw) {
  std::vector<std::optional<SymMatrix>> slots(n);
  parallel_for(n, workers, [&](std::size_t i) {
    StreamRng rng(seed, kSampleStream, i);
    slots[i].emplace(SymMatrix::symmetrize(draw(rng)));
  });
  std::vector<SymMatrix> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline void require_count(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
}

/// Integer j with |2p - j| <= tolerance, if any.
inline std::optional<int> half_integer_index(double p) {
  const double j = std::round(2.0 * p);
  if (j >= 1.0 && std::abs(2.0 * p - j) <= kHalfIntegerTolerance) return static_cast<int>(j);
  return std::nullopt;
}

/// U^T diag(block, 0) U.
inline Eigen::MatrixXd lift(const Eigen::MatrixXd& block, const Eigen::MatrixXd& u_orth) {
  const Index d = u_orth.rows();
  const Index r = block.rows();
  if (r == d) return u_orth.transpose() * block * u_orth;
  const auto top = u_orth.topRows(r);
  return top.transpose() * block * top;
}

/// Sum of j outer products z z^T, z = factor * g, g standard normal.
inline Eigen::MatrixXd gaussian_sum_draw(const Eigen::MatrixXd& factor, int j, StreamRng& rng) {
  Eigen::MatrixXd g(factor.cols(), j);
  for (Index c = 0; c < j; ++c)
    for (Index k = 0; k < factor.cols(); ++k) g(k, c) = rng.normal();
  const Eigen::MatrixXd z = factor * g;
  return z * z.transpose();
}

/// C T T^T C on the r x r block, C = diag(half_root), T lower triangular
/// with T_ii^2 ~ chi^2(2p - i) (0-based i) and standard normal below.
inline Eigen::MatrixXd bartlett_block_draw(const Eigen::VectorXd& half_root, double p, StreamRng& rng) {
  const Index r = half_root.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
  for (Index i = 0; i < r; ++i) {
    t(i, i) = std::sqrt(rng.chi_square(2.0 * p - static_cast<double>(i)));
    for (Index k = 0; k < i; ++k) t(i, k) = rng.normal();
  }
  const Eigen::MatrixXd ct = half_root.asDiagonal() * t;
  return ct * ct.transpose();
}

}  // namespace detail

/// 2p = j integer: X = sum of j outer products of N(0, sigma/2) vectors drawn
/// inside range(sigma).
inline SampleBatch sample_gaussian_sum(const WishartSpec& spec, std::size_t n, std::uint64_t seed,
                                       const SamplerOptions& opts = {}) {
  require_exists(spec);
  detail::require_count(n);
  const auto j = detail::half_integer_index(spec.shape);
  if (!j) {
    throw Error(ErrorCode::ShapeNotHalfInteger, "2p = " + std::to_string(2.0 * spec.shape) +
                                                    " is not an integer");
  }
  const ScaleFactorization& f = spec.scale;
  const Eigen::MatrixXd factor =
      f.range_basis() * (0.5 * f.leading_eigs()).cwiseSqrt().asDiagonal();
  const int count = *j;
  SampleBatch batch{spec, {}, seed, detail::stream_layout(seed), SamplerPath::GaussianSum};
  batch.samples = detail::draw_batch(n, seed, opts.workers, [&](StreamRng& rng) {
    return detail::gaussian_sum_draw(factor, count, rng);
  });
  return batch;
}

/// Triangular-factor construction on the rank-r block for p > (r-1)/2, then
/// embedded and conjugated back to dimension d.
inline SampleBatch sample_bartlett(const WishartSpec& spec, std::size_t n, std::uint64_t seed,
                                   const SamplerOptions& opts = {}) {
  require_exists(spec);
  detail::require_count(n);
  const Index r = spec.rank();
  if (!(2.0 * spec.shape > static_cast<double>(r - 1) + kHalfIntegerTolerance)) {
    throw Error(ErrorCode::ShapeTooSmall, "p = " + std::to_string(spec.shape) +
                                              " must exceed (r-1)/2 = " + std::to_string((r - 1) / 2.0));
  }
  const Eigen::VectorXd half_root = (0.5 * spec.scale.leading_eigs()).cwiseSqrt();
  const Eigen::MatrixXd& u = spec.scale.u_orth;
  const double p = spec.shape;
  SampleBatch batch{spec, {}, seed, detail::stream_layout(seed), SamplerPath::Bartlett};
  batch.samples = detail::draw_batch(n, seed, opts.workers, [&](StreamRng& rng) {
    return detail::lift(detail::bartlett_block_draw(half_root, p, rng), u);
  });
  return batch;
}

/// Rank-one scale lambda q q^T: X = G q q^T with G ~ Gamma(p, lambda).
inline SampleBatch sample_rank1_gamma(const WishartSpec& spec, std::size_t n, std::uint64_t seed,
                                      const SamplerOptions& opts = {}) {
  if (spec.rank() != 1) {
    throw Error(ErrorCode::RankNotOne, "scale has rank " + std::to_string(spec.rank()));
  }
  require_exists(spec);
  detail::require_count(n);
  const Eigen::VectorXd q = spec.scale.u_orth.row(0).transpose();
  const Eigen::MatrixXd qq = q * q.transpose();
  const double lambda = spec.scale.eigs(0);
  const double p = spec.shape;
  SampleBatch batch{spec, {}, seed, detail::stream_layout(seed), SamplerPath::Rank1Gamma};
  batch.samples = detail::draw_batch(n, seed, opts.workers, [&](StreamRng& rng) {
    return Eigen::MatrixXd(rng.gamma(p, lambda) * qq);
  });
  return batch;
}

/// Samples Gamma(p; D) on the rank-r cone, then maps each draw through
/// embed(., d) and conjugation by U^T.
inline SampleBatch sample_degenerate(const WishartSpec& spec, std::size_t n, std::uint64_t seed,
                                     const SamplerOptions& opts = {}) {
  require_exists(spec);
  detail::require_count(n);
  const WishartSpec inner =
      theta_contains(spec.shape, SymMatrix::diagonal(spec.scale.leading_eigs()), spec.scale.rank_tolerance);
  require_exists(inner);
  SampleBatch inner_batch = detail::half_integer_index(spec.shape)
                                ? sample_gaussian_sum(inner, n, seed, opts)
                                : sample_bartlett(inner, n, seed, opts);

  const Index d = spec.dim();
  const Eigen::MatrixXd ut = spec.scale.u_orth.transpose();
  std::vector<std::optional<SymMatrix>> slots(n);
  detail::parallel_for(n, opts.workers, [&](std::size_t i) {
    const SymMatrix padded = embed(inner_batch.samples[i], d);
    slots[i].emplace(detail::conjugate_unchecked(padded.dense(), ut));
  });

  SampleBatch batch{spec, {}, seed, inner_batch.stream_layout, SamplerPath::Degenerate};
  batch.samples.reserve(n);
  for (auto& s : slots) batch.samples.push_back(std::move(*s));
  return batch;
}

/// Routing: rank 1 -> gamma embedding; 2p integer -> Gaussian sum;
/// p > (r-1)/2 -> triangular factor (through the degenerate pipeline when r < d).
inline SampleBatch sample(const WishartSpec& spec, std::size_t n, std::uint64_t seed,
                          const SamplerOptions& opts = {}) {
  require_exists(spec);
  detail::require_count(n);
  const Index r = spec.rank();
  if (r == 1) return sample_rank1_gamma(spec, n, seed, opts);
  if (detail::half_integer_index(spec.shape)) return sample_gaussian_sum(spec, n, seed, opts);
  if (2.0 * spec.shape > static_cast<double>(r - 1)) {
    return r < spec.dim() ? sample_degenerate(spec, n, seed, opts) : sample_bartlett(spec, n, seed, opts);
  }
  // The Gindikin set is exactly the half-integers plus the ray, so a validated
  // spec cannot reach this point.
  throw Error(ErrorCode::NonExistent, "no sampler covers p = " + std::to_string(spec.shape));
}

/// Each output is the sum of n_factors independent draws from
/// Gamma(p / n_factors; sigma); only rank-one scales admit every root.
inline SampleBatch divisibility_demo(const WishartSpec& spec, int n_factors, std::size_t n,
                                     std::uint64_t seed, const SamplerOptions& opts = {}) {
  if (spec.rank() != 1) {
    throw Error(ErrorCode::RankNotOne, "infinite divisibility requires rank 1, scale has rank " +
                                           std::to_string(spec.rank()));
  }
  detail::require_count(n);
  const WishartSpec factor = divide(spec, n_factors);
  const Eigen::VectorXd q = factor.scale.u_orth.row(0).transpose();
  const Eigen::MatrixXd qq = q * q.transpose();
  const double lambda = factor.scale.eigs(0);
  const double p = factor.shape;
  SampleBatch batch{spec, {}, seed, detail::stream_layout(seed), SamplerPath::Divisibility};
  batch.samples = detail::draw_batch(n, seed, opts.workers, [&](StreamRng& rng) {
    double g = 0.0;
    for (int k = 0; k < n_factors; ++k) g += rng.gamma(p, lambda);
    return Eigen::MatrixXd(g * qq);
  });
  return batch;
}

/// max_i ||(I - P) X_i (I - P)||_F / (1 + ||X_i||_F), P the projector onto range(sigma).
inline double support_violation(const SampleBatch& batch) {
  const Index d = batch.dim();
  const Eigen::MatrixXd comp = Eigen::MatrixXd::Identity(d, d) - batch.spec.scale.range_projector();
  double worst = 0.0;
  for (const auto& x : batch.samples) {
    const double off = (comp * x.dense() * comp).norm();
    worst = std::max(worst, off / (1.0 + x.dense().norm()));
  }
  return worst;
}

/// Every sample has min eigenvalue >= -tolerance * max |eigenvalue|.
inline bool all_psd(const SampleBatch& batch, double tolerance = kDefaultRankTolerance) {
  for (const auto& x : batch.samples) {
    const Eigen::VectorXd ev = eigenvalues(x);
    const double scale = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() < -tolerance * scale) return false;
  }
  return true;
}

/// Entrywise sample mean and standard error of the mean.
struct BatchMoments {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;
};

inline BatchMoments batch_moments(const SampleBatch& batch) {
  if (batch.samples.empty()) throw Error(ErrorCode::EmptyBatch, "batch_moments: empty batch");
  const Index d = batch.dim();
  const double n = static_cast<double>(batch.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : batch.samples) sum += x.dense();
  const Eigen::MatrixXd mean = sum / n;
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : batch.samples) sq += (x.dense() - mean).cwiseAbs2();
  const double denom = batch.size() > 1 ? n - 1.0 : 1.0;
  return {mean, (sq / denom / n).cwiseSqrt()};
}

}  // namespace wishart_cone
