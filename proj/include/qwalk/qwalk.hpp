#pragma once

// Discrete-time quantum walks on the line: multicoin and decoherent-coin
// dynamics, direct and momentum-space moment computation, and long-time
// growth-law analysis.

#include "qwalk/channel.hpp"
#include "qwalk/coin.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/evolve.hpp"
#include "qwalk/kspace.hpp"
#include "qwalk/linalg.hpp"
#include "qwalk/runner.hpp"
#include "qwalk/tolerances.hpp"
