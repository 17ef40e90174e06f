#pragma once

// Experiment configs, deterministic CSV reports and the four commands behind
// the wishart_cone CLI: check, sample, certify and divide.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wishart_cone/errors.hpp"
#include "wishart_cone/json_io.hpp"
#include "wishart_cone/laplace.hpp"
#include "wishart_cone/param_domain.hpp"
#include "wishart_cone/psd_core.hpp"
#include "wishart_cone/sampler.hpp"

namespace wishart_cone {

/// Process exit statuses of the CLI.
enum ExitStatus : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitParse = 2,
  kExitNonExistent = 3,
  kExitCertificationFailed = 4,
};

inline int exit_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonExistent: return kExitNonExistent;
    case ErrorCode::IoError: return kExitIo;
    default: return kExitParse;
  }
}

struct ExperimentConfig {
  double shape = 0.0;
  SymMatrix scale = SymMatrix::identity(1);
  std::size_t n_samples = 200000;
  std::uint64_t seed = 1;
  std::size_t n_probes = 25;
  std::uint64_t probe_seed = 2;
  double rank_tolerance = kDefaultRankTolerance;
  int n_factors = 2;

  /// Canonical compact JSON of the effective config.
  std::string echo() const {
    nlohmann::json j;
    j["shape"] = shape;
    j["scale"] = matrix_to_json(scale);
    j["n_samples"] = n_samples;
    j["seed"] = seed;
    j["n_probes"] = n_probes;
    j["probe_seed"] = probe_seed;
    j["rank_tolerance"] = rank_tolerance;
    j["n_factors"] = n_factors;
    return j.dump();
  }
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ParseError, "field '" + field + "': " + msg);
}

inline std::uint64_t read_uint(const nlohmann::json& obj, const char* key, std::uint64_t fallback,
                               std::uint64_t minimum) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    field_error(key, "expected a non-negative integer");
  }
  const auto x = v.get<std::uint64_t>();
  if (x < minimum) field_error(key, "must be >= " + std::to_string(minimum));
  return x;
}

inline double read_real(const nlohmann::json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) field_error(key, "expected a number");
  return v.get<double>();
}

}  // namespace detail

/// Parses a JSON experiment config. "p" is accepted as an alias of "shape".
inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "malformed JSON at " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");

  ExperimentConfig cfg;
  const char* shape_key = root.contains("shape") ? "shape" : (root.contains("p") ? "p" : nullptr);
  if (!shape_key) detail::field_error("shape", "missing");
  cfg.shape = detail::read_real(root, shape_key);
  if (!root.contains("scale")) detail::field_error("scale", "missing");
  cfg.scale = matrix_from_json(root.at("scale"), "scale");
  cfg.n_samples = detail::read_uint(root, "n_samples", cfg.n_samples, 1);
  cfg.seed = detail::read_uint(root, "seed", cfg.seed, 0);
  cfg.n_probes = detail::read_uint(root, "n_probes", cfg.n_probes, 1);
  cfg.probe_seed = detail::read_uint(root, "probe_seed", cfg.probe_seed, 0);
  if (root.contains("rank_tolerance")) {
    cfg.rank_tolerance = detail::read_real(root, "rank_tolerance");
    if (!(cfg.rank_tolerance > 0.0 && cfg.rank_tolerance < 1.0)) {
      detail::field_error("rank_tolerance", "must lie in (0, 1)");
    }
  }
  cfg.n_factors = static_cast<int>(detail::read_uint(root, "n_factors", 2, 1));
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(x));
  return buf;
}

/// One row per sample: index, then the upper triangle in row-major order.
inline std::string batch_to_csv(const SampleBatch& batch, const std::string& config_echo) {
  std::string out;
  out += "# wishart_cone sample\n";
  out += "# config: " + config_echo + "\n";
  out += std::string("# path: ") + to_string(batch.path) + "\n";
  out += "# stream_layout: " + batch.stream_layout + "\n";
  const Index d = batch.dim();
  out += "index";
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) out += ",x_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
  out += "\n";
  for (std::size_t k = 0; k < batch.size(); ++k) {
    out += std::to_string(k);
    const SymMatrix& x = batch.samples[k];
    for (Index i = 0; i < d; ++i)
      for (Index j = i; j < d; ++j) {
        out += ',';
        out += format_double(x(i, j));
      }
    out += '\n';
  }
  return out;
}

inline std::string probes_to_csv(const std::vector<ProbeReport>& reports, const std::string& command,
                                 const std::string& config_echo, bool pass) {
  std::string out;
  out += "# wishart_cone " + command + "\n";
  out += "# config: " + config_echo + "\n";
  out += std::string("# pass: ") + (pass ? "true" : "false") + "\n";
  out += probe_csv_header();
  out += '\n';
  for (const auto& r : reports) {
    out += to_csv_row(r);
    out += '\n';
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open output " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

struct RunOptions {
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed_override;
  std::size_t min_samples = 0;
  unsigned workers = default_workers();
};

struct RunReport {
  std::string command;
  std::string config_echo;
  Index dim = 0;
  Index rank = 0;
  std::string branch;
  bool exists = false;
  bool infinitely_divisible = false;
  std::optional<SamplerPath> path;
  std::optional<std::uint64_t> output_hash;
  std::optional<double> support_violation;
  std::vector<ProbeReport> probes;
  std::optional<long> refused_at;
  std::vector<std::string> notes;
  bool pass = false;
  int exit_status = kExitOk;
  double wall_time = 0.0;  // seconds; kept out of every deterministic output
};

/// Deterministic key: value summary (wall time excluded).
inline void print_report(const RunReport& r, std::ostream& os) {
  os << "command: " << r.command << '\n';
  os << "config: " << r.config_echo << '\n';
  os << "dim: " << r.dim << '\n';
  os << "rank: " << r.rank << '\n';
  os << "gindikin_branch: " << r.branch << '\n';
  os << "exists: " << (r.exists ? "true" : "false") << '\n';
  if (r.exists) os << "infinitely_divisible: " << (r.infinitely_divisible ? "true" : "false") << '\n';
  if (r.path) os << "path: " << to_string(*r.path) << '\n';
  if (r.output_hash) os << "output_hash: " << hex64(*r.output_hash) << '\n';
  if (r.support_violation) {
    os << "support_check: " << (*r.support_violation <= 1e-8 ? "pass" : "fail")
       << " (max relative off-range norm " << format_double(*r.support_violation) << ")\n";
  }
  if (!r.probes.empty()) {
    std::size_t within = 0;
    double worst = 0.0;
    for (const auto& p : r.probes) {
      if (std::abs(p.z_score) <= kCertifyZ) ++within;
      worst = std::max(worst, std::abs(p.z_score));
    }
    os << "probes_within_4_stderr: " << within << "/" << r.probes.size() << '\n';
    os << "max_abs_z: " << format_double(worst) << '\n';
  }
  if (r.refused_at) os << "refused_at_n_factors: " << *r.refused_at << '\n';
  for (const auto& n : r.notes) os << "note: " << n << '\n';
  os << "pass: " << (r.pass ? "true" : "false") << '\n';
  os << "exit_status: " << r.exit_status << '\n';
}

namespace detail {

inline RunReport base_report(const std::string& command, const ExperimentConfig& cfg, const WishartSpec& spec) {
  RunReport r;
  r.command = command;
  r.config_echo = cfg.echo();
  r.dim = spec.dim();
  r.rank = spec.rank();
  r.branch = spec.verdict.describe();
  r.exists = spec.exists;
  r.infinitely_divisible = spec.infinitely_divisible;
  return r;
}

inline ExperimentConfig effective(ExperimentConfig cfg, const RunOptions& opts) {
  if (opts.seed_override) cfg.seed = *opts.seed_override;
  return cfg;
}

inline void finish(RunReport& r, std::chrono::steady_clock::time_point start) {
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline void certify_into(RunReport& r, const SampleBatch& batch, const ExperimentConfig& cfg,
                         const RunOptions& opts) {
  const auto probes = random_probes(batch.dim(), cfg.n_probes, cfg.probe_seed);
  Certification cert = certify(batch, probes);
  r.probes = std::move(cert.reports);
  r.pass = cert.pass;
  if (cfg.n_samples < opts.min_samples) {
    r.pass = false;
    r.notes.push_back("n_samples " + std::to_string(cfg.n_samples) + " below --min-samples " +
                      std::to_string(opts.min_samples));
  }
  r.exit_status = r.pass ? kExitOk : kExitCertificationFailed;
  if (opts.out_path) write_file(*opts.out_path, probes_to_csv(r.probes, r.command, r.config_echo, r.pass));
}

}  // namespace detail

/// Rank, Gindikin branch, existence and divisibility; no sampling.
inline RunReport cmd_check(const ExperimentConfig& config, const RunOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = detail::effective(config, opts);
  const WishartSpec spec = theta_contains(cfg.shape, cfg.scale, cfg.rank_tolerance);
  RunReport r = detail::base_report("check", cfg, spec);
  r.pass = spec.exists;
  r.exit_status = spec.exists ? kExitOk : kExitNonExistent;
  detail::finish(r, start);
  return r;
}

inline RunReport cmd_sample(const ExperimentConfig& config, const RunOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = detail::effective(config, opts);
  const WishartSpec spec = theta_contains(cfg.shape, cfg.scale, cfg.rank_tolerance);
  RunReport r = detail::base_report("sample", cfg, spec);
  if (!spec.exists) {
    r.exit_status = kExitNonExistent;
    detail::finish(r, start);
    return r;
  }
  const SampleBatch batch = sample(spec, cfg.n_samples, cfg.seed, SamplerOptions{opts.workers});
  const std::string csv = batch_to_csv(batch, r.config_echo);
  r.path = batch.path;
  r.output_hash = fnv1a64(csv);
  r.support_violation = support_violation(batch);
  r.pass = *r.support_violation <= 1e-8;
  r.exit_status = kExitOk;
  if (opts.out_path) write_file(*opts.out_path, csv);
  detail::finish(r, start);
  return r;
}

/// Samples, compares the empirical Laplace transform with the closed form at
/// n_probes random probes, and applies the |z| criterion.
inline RunReport cmd_certify(const ExperimentConfig& config, const RunOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = detail::effective(config, opts);
  const WishartSpec spec = theta_contains(cfg.shape, cfg.scale, cfg.rank_tolerance);
  RunReport r = detail::base_report("certify", cfg, spec);
  if (!spec.exists) {
    r.exit_status = kExitNonExistent;
    detail::finish(r, start);
    return r;
  }
  const SampleBatch batch = sample(spec, cfg.n_samples, cfg.seed, SamplerOptions{opts.workers});
  r.path = batch.path;
  detail::certify_into(r, batch, cfg, opts);
  detail::finish(r, start);
  return r;
}

/// Rank one: certifies the n_factors-fold convolution of Gamma(p/n_factors; sigma)
/// against Gamma(p; sigma). Higher rank: reports the smallest n whose root
/// is refused by the parameter gate.
inline RunReport cmd_divide(const ExperimentConfig& config, const RunOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = detail::effective(config, opts);
  const WishartSpec spec = theta_contains(cfg.shape, cfg.scale, cfg.rank_tolerance);
  RunReport r = detail::base_report("divide", cfg, spec);
  if (!spec.exists) {
    r.exit_status = kExitNonExistent;
    detail::finish(r, start);
    return r;
  }
  if (spec.rank() != 1) {
    r.refused_at = first_refused_division(spec);
    r.notes.push_back("gate refusal: p/n = " + format_double(spec.shape / static_cast<double>(*r.refused_at)) +
                      " is not in the Gindikin set of rank " + std::to_string(spec.rank()) + " at n_factors = " +
                      std::to_string(*r.refused_at) + "; Gamma(p; sigma) is not infinitely divisible");
    r.pass = false;
    r.exit_status = kExitNonExistent;
    detail::finish(r, start);
    return r;
  }
  const SampleBatch batch =
      divisibility_demo(spec, cfg.n_factors, cfg.n_samples, cfg.seed, SamplerOptions{opts.workers});
  r.path = batch.path;
  detail::certify_into(r, batch, cfg, opts);
  detail::finish(r, start);
  return r;
}

/// Runs a command by name, printing the report to out and errors to err.
/// Returns the process exit status.
inline int run_command(const std::string& command, const std::string& config_path, const RunOptions& opts,
                       std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    RunReport r;
    if (command == "check") {
      r = cmd_check(cfg, opts);
    } else if (command == "sample") {
      r = cmd_sample(cfg, opts);
    } else if (command == "certify") {
      r = cmd_certify(cfg, opts);
    } else if (command == "divide") {
      r = cmd_divide(cfg, opts);
    } else {
      err << "unknown command: " << command << '\n';
      return kExitParse;
    }
    print_report(r, out);
    err << "wall_time_s: " << r.wall_time << '\n';
    return r.exit_status;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status_for(e.code());
  }
}

}  // namespace wishart_cone
