#pragma once

#include "pdmm/averaging.hpp"
#include "pdmm/diagnostics.hpp"
#include "pdmm/experiment.hpp"
#include "pdmm/graph.hpp"
#include "pdmm/linalg.hpp"
#include "pdmm/mirror.hpp"
#include "pdmm/objective.hpp"
#include "pdmm/random.hpp"
#include "pdmm/run.hpp"
#include "pdmm/serialize.hpp"
#include "pdmm/solver.hpp"
#include "pdmm/stacked.hpp"
