#pragma once

// Staged cumulative ranked voting: ballots, stage tallies, winner selection,
// comparison methods and the election simulator.

#include "stagevote/ballot.hpp"
#include "stagevote/baselines.hpp"
#include "stagevote/errors.hpp"
#include "stagevote/rational.hpp"
#include "stagevote/report.hpp"
#include "stagevote/select.hpp"
#include "stagevote/sim.hpp"
#include "stagevote/sim_config.hpp"
#include "stagevote/tally.hpp"
