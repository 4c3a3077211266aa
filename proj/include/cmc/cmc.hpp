#pragma once

// Umbrella header: the complete doubly periodic constant-mean-curvature
// family pipeline, from loop algebra to solved potentials, invariants,
// meshes, and isoperimetric profiles.

#include "cmc/fft.hpp"
#include "cmc/invariants.hpp"
#include "cmc/iwasawa.hpp"
#include "cmc/loop.hpp"
#include "cmc/mat2.hpp"
#include "cmc/matrix_loop.hpp"
#include "cmc/monodromy.hpp"
#include "cmc/parallel.hpp"
#include "cmc/potential.hpp"
#include "cmc/profiles.hpp"
#include "cmc/serialize.hpp"
#include "cmc/solver.hpp"
#include "cmc/surface.hpp"
#include "cmc/transport.hpp"
#include "cmc/version.hpp"
