#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wishart_cone/param_domain.hpp"
#include "wishart_cone/psd_core.hpp"

namespace wishart_cone {

enum class SamplerPath { Rank1Gamma, GaussianSum, Bartlett, Degenerate, Divisibility };

inline const char* to_string(SamplerPath path) {
  switch (path) {
    case SamplerPath::Rank1Gamma: return "rank1_gamma";
    case SamplerPath::GaussianSum: return "gaussian_sum";
    case SamplerPath::Bartlett: return "bartlett";
    case SamplerPath::Degenerate: return "degenerate";
    case SamplerPath::Divisibility: return "divisibility";
  }
  return "unknown";
}

/// Draws from Gamma(p; sigma) with the provenance needed to regenerate them.
struct SampleBatch {
  WishartSpec spec;
  std::vector<SymMatrix> samples;
  std::uint64_t seed = 0;
  std::string stream_layout;
  SamplerPath path = SamplerPath::GaussianSum;

  std::size_t size() const { return samples.size(); }
  Index dim() const { return spec.dim(); }
};

}  // namespace wishart_cone
