#pragma once
// Umbrella header for the directional-linear independence test library.

#include "dirlin/baselines.hpp"
#include "dirlin/bootstrap_bandwidths.hpp"
#include "dirlin/errors.hpp"
#include "dirlin/fdr.hpp"
#include "dirlin/independence.hpp"
#include "dirlin/kde.hpp"
#include "dirlin/matrix.hpp"
#include "dirlin/models.hpp"
#include "dirlin/optim.hpp"
#include "dirlin/orientation.hpp"
#include "dirlin/parallel.hpp"
#include "dirlin/quadrature.hpp"
#include "dirlin/rng.hpp"
#include "dirlin/sample.hpp"
#include "dirlin/special.hpp"
#include "dirlin/study.hpp"
#include "dirlin/unit_vector.hpp"
#include "dirlin/vmf.hpp"
#include "dirlin/wildfire.hpp"

namespace dirlin {

inline constexpr const char* version = "0.1.0";

}  // namespace dirlin
