#pragma once

// Umbrella header for the kernel conditional-expectation denoiser.

#include "kdenoise/bandwidth.hpp"
#include "kdenoise/core.hpp"
#include "kdenoise/experiments.hpp"
#include "kdenoise/image.hpp"
#include "kdenoise/image_io.hpp"
#include "kdenoise/kernels.hpp"
#include "kdenoise/metrics.hpp"
#include "kdenoise/noise.hpp"
#include "kdenoise/patches.hpp"
#include "kdenoise/pipeline.hpp"
#include "kdenoise/solver.hpp"
#include "kdenoise/sparse_matrix.hpp"
