#pragma once

#include "wishart_cone/errors.hpp"
#include "wishart_cone/harness.hpp"
#include "wishart_cone/json_io.hpp"
#include "wishart_cone/laplace.hpp"
#include "wishart_cone/param_domain.hpp"
#include "wishart_cone/psd_core.hpp"
#include "wishart_cone/rng.hpp"
#include "wishart_cone/sample_batch.hpp"
#include "wishart_cone/sampler.hpp"
