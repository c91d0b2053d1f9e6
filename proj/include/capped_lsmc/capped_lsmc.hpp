#pragma once

#include "capped_lsmc/cap_models.hpp"
#include "capped_lsmc/config.hpp"
#include "capped_lsmc/csv.hpp"
#include "capped_lsmc/experiment.hpp"
#include "capped_lsmc/lsmc.hpp"
#include "capped_lsmc/market_model.hpp"
#include "capped_lsmc/oracles.hpp"
#include "capped_lsmc/path_engine.hpp"
#include "capped_lsmc/regression.hpp"
#include "capped_lsmc/rng.hpp"
