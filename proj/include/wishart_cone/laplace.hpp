#pragma once

// Laplace transform E exp(-tr(v X)) = det(I + sigma v)^{-p} of the Wishart
// law, the Riesz comparison transform, and the Monte-Carlo estimator used to
// certify samplers against the closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wishart_cone/errors.hpp"
#include "wishart_cone/param_domain.hpp"
#include "wishart_cone/psd_core.hpp"
#include "wishart_cone/rng.hpp"
#include "wishart_cone/sample_batch.hpp"

namespace wishart_cone {

inline constexpr std::uint64_t kProbeStream = 0x70726f6265ULL;  // "probe"
inline constexpr double kCertifyZ = 4.0;
inline constexpr double kCertifyZMax = 6.0;
inline constexpr double kCertifyFraction = 0.95;

/// A PSD probe point v. The transform is evaluated at u = -v.
class LaplaceProbe {
 public:
  explicit LaplaceProbe(SymMatrix v) : v_(std::move(v)) {
    const PsdCheck check = psd_check(v_);
    if (!check.is_psd) {
      throw Error(ErrorCode::NotPsd, "probe has eigenvalue " + std::to_string(check.min_eigenvalue));
    }
  }

  const SymMatrix& v() const { return v_; }
  Index dim() const { return v_.dim(); }

 private:
  SymMatrix v_;
};

namespace detail {

/// -log det(I + sigma v)^{-p} = p * sum log1p(mu_i), mu the eigenvalues of
/// sigma^{1/2} v sigma^{1/2}. Valid for any symmetric v with I + sigma v
/// nonsingular and mu_i > -1; callers with PSD v get mu_i >= 0.
inline double laplace_exponent(const WishartSpec& spec, const Eigen::MatrixXd& v) {
  const Eigen::MatrixXd root = spec.scale.sqrt_sigma();
  const SymMatrix product = SymMatrix::symmetrize(root * v * root);
  const Eigen::VectorXd mu = eigenvalues(product);
  double acc = 0.0;
  for (Index i = 0; i < mu.size(); ++i) acc += std::log1p(mu(i));
  return spec.shape * acc;
}

inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace detail

inline void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionError, std::string(what) + ": dimension " + std::to_string(a) +
                                               " vs " + std::to_string(b));
  }
}

inline double analytic_laplace(const WishartSpec& spec, const LaplaceProbe& probe) {
  require_exists(spec);
  require_same_dim(spec.dim(), probe.dim(), "analytic_laplace");
  const double exponent = detail::laplace_exponent(spec, probe.v().dense());
  return std::exp(-std::max(exponent, 0.0));
}

/// det(project((I + v)^{-1}, r))^p.
inline double riesz_laplace(double p, Index r, const LaplaceProbe& probe) {
  if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "riesz_laplace: p must be > 0");
  const Index d = probe.dim();
  if (r < 1 || r > d) throw Error(ErrorCode::DimensionError, "riesz_laplace: r outside [1, d]");
  const Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(d, d) + probe.v().dense();
  const Eigen::MatrixXd inv = shifted.llt().solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd block = 0.5 * (inv.topLeftCorner(r, r) + inv.topLeftCorner(r, r).transpose());
  const Eigen::LLT<Eigen::MatrixXd> llt(block);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::exp(p * log_det);
}

struct LaplaceEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean of exp(-tr(v X_i)) and its standard error s / sqrt(n).
/// Summation is pairwise in index order, so the result depends only on the
/// batch contents.
inline LaplaceEstimate empirical_laplace(const SampleBatch& batch, const LaplaceProbe& probe) {
  if (batch.samples.empty()) throw Error(ErrorCode::EmptyBatch, "empirical_laplace: empty batch");
  const std::size_t n = batch.samples.size();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    require_same_dim(batch.samples[i].dim(), probe.dim(), "empirical_laplace");
    values[i] = std::exp(-trace_product(probe.v(), batch.samples[i]));
  }
  const double mean = detail::pairwise_sum(values) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  for (double& x : values) x = (x - mean) * (x - mean);
  const double var = detail::pairwise_sum(values) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

/// E[X] = p * sigma, the gradient of -log L at v = 0.
inline SymMatrix mean_matrix(const WishartSpec& spec) {
  require_exists(spec);
  return SymMatrix::symmetrize(spec.shape * spec.scale.sigma.dense());
}

struct ProbeReport {
  std::size_t probe_index = 0;
  LaplaceProbe probe;
  double analytic = 1.0;
  double empirical_mean = 1.0;
  double empirical_stderr = 0.0;
  double z_score = 0.0;
  std::size_t n_samples = 0;
};

inline double z_score(double empirical, double analytic, double std_error) {
  const double diff = empirical - analytic;
  if (std_error > 0.0) return diff / std_error;
  if (std::abs(diff) <= 1e-12) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

inline ProbeReport probe_report(const WishartSpec& spec, const SampleBatch& batch,
                                const LaplaceProbe& probe, std::size_t index) {
  const double analytic = analytic_laplace(spec, probe);
  const LaplaceEstimate est = empirical_laplace(batch, probe);
  return ProbeReport{index, probe, analytic, est.mean, est.std_error,
                     z_score(est.mean, analytic, est.std_error), batch.size()};
}

/// Random probe W^T W with W standard Gaussian, rescaled so that tr(v) is
/// uniform on [0.1, 2].
inline LaplaceProbe random_probe(Index d, std::uint64_t probe_seed, std::uint64_t index) {
  StreamRng rng(probe_seed, kProbeStream, index);
  Eigen::MatrixXd w(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) w(i, j) = rng.normal();
  const double target_trace = 0.1 + 1.9 * rng.uniform();
  Eigen::MatrixXd v = w.transpose() * w;
  v *= target_trace / v.trace();
  return LaplaceProbe(SymMatrix::symmetrize(v));
}

inline std::vector<LaplaceProbe> random_probes(Index d, std::size_t count, std::uint64_t probe_seed) {
  std::vector<LaplaceProbe> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_probe(d, probe_seed, i));
  return out;
}

/// |z| <= 4 at no fewer than 95% of probes and |z| <= 6 at every probe.
inline bool certification_passes(std::span<const ProbeReport> reports) {
  if (reports.empty()) return false;
  std::size_t within = 0;
  for (const auto& r : reports) {
    const double az = std::abs(r.z_score);
    if (!(az <= kCertifyZMax)) return false;
    if (az <= kCertifyZ) ++within;
  }
  return static_cast<double>(within) >= kCertifyFraction * static_cast<double>(reports.size());
}

struct Certification {
  std::vector<ProbeReport> reports;
  bool pass = false;
};

inline Certification certify(const SampleBatch& batch, std::span<const LaplaceProbe> probes) {
  Certification c;
  c.reports.reserve(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    c.reports.push_back(probe_report(batch.spec, batch, probes[i], i));
  }
  c.pass = certification_passes(c.reports);
  return c;
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const char* probe_csv_header() {
  return "probe_index,trace_v,analytic,empirical_mean,empirical_stderr,z_score,n_samples";
}

inline std::string to_csv_row(const ProbeReport& r) {
  return std::to_string(r.probe_index) + "," + format_double(r.probe.v().dense().trace()) + "," +
         format_double(r.analytic) + "," + format_double(r.empirical_mean) + "," +
         format_double(r.empirical_stderr) + "," + format_double(r.z_score) + "," +
         std::to_string(r.n_samples);
}

}  // namespace wishart_cone
