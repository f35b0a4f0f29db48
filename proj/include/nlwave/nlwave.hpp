#pragma once

#include "nlwave/errors.hpp"
#include "nlwave/hash.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/kernels.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/stencil.hpp"
#include "nlwave/timestepper.hpp"
#include "nlwave/ztransform.hpp"
#include "nlwave/dtd_1d.hpp"
#include "nlwave/dtd_2d.hpp"
#include "nlwave/cache.hpp"
#include "nlwave/dtn.hpp"
#include "nlwave/diagnostics.hpp"
#include "nlwave/reference.hpp"
#include "nlwave/solver.hpp"
#include "nlwave/config.hpp"
