#pragma once

#include "recgame/error.hpp"
#include "recgame/everett.hpp"
#include "recgame/matgame.hpp"
#include "recgame/model.hpp"
#include "recgame/respond.hpp"
#include "recgame/shapley.hpp"
#include "recgame/sim.hpp"
#include "recgame/zoo.hpp"
