#pragma once

#include "nonexp/errors.hpp"
#include "nonexp/hilbert.hpp"
#include "nonexp/random.hpp"
#include "nonexp/convex.hpp"
#include "nonexp/mappings.hpp"
#include "nonexp/semigroup.hpp"
#include "nonexp/means.hpp"
#include "nonexp/attractive.hpp"
#include "nonexp/ergodic.hpp"
#include "nonexp/config.hpp"
#include "nonexp/io.hpp"
#include "nonexp/experiment.hpp"
