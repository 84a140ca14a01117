#ifndef FPPO_FPPO_HPP_
#define FPPO_FPPO_HPP_

#include "fppo/analysis.hpp"
#include "fppo/core.hpp"
#include "fppo/fidelity.hpp"
#include "fppo/harness.hpp"
#include "fppo/metrics.hpp"
#include "fppo/operators.hpp"
#include "fppo/pgm.hpp"
#include "fppo/prox.hpp"
#include "fppo/rng.hpp"
#include "fppo/solvers.hpp"

#endif  // FPPO_FPPO_HPP_
