#pragma once

#include "hbe/baselines.hpp"
#include "hbe/construction.hpp"
#include "hbe/dataset_io.hpp"
#include "hbe/diagnostics.hpp"
#include "hbe/error.hpp"
#include "hbe/estimation.hpp"
#include "hbe/index.hpp"
#include "hbe/kernels.hpp"
#include "hbe/kmvm.hpp"
#include "hbe/lsh.hpp"
#include "hbe/random.hpp"
#include "hbe/sampler.hpp"
#include "hbe/variance_bounds.hpp"
