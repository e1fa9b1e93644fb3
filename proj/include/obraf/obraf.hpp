#pragma once

// Umbrella header: oblique random forests with MPSVM splits, the RVFL-routed
// hybrid ensemble, and the benchmark harness around them.

#include "obraf/dataset.hpp"
#include "obraf/errors.hpp"
#include "obraf/forest.hpp"
#include "obraf/harness.hpp"
#include "obraf/numerics.hpp"
#include "obraf/random.hpp"
#include "obraf/rvfl.hpp"
#include "obraf/serialize.hpp"
#include "obraf/tree.hpp"
