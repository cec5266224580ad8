#pragma once

#include "tricover/consensus.hpp"
#include "tricover/engine.hpp"
#include "tricover/export.hpp"
#include "tricover/formation.hpp"
#include "tricover/formation_engine.hpp"
#include "tricover/geometry.hpp"
#include "tricover/montecarlo.hpp"
#include "tricover/motion.hpp"
#include "tricover/netsim.hpp"
#include "tricover/rng.hpp"
#include "tricover/scenario.hpp"
#include "tricover/search.hpp"
#include "tricover/stats.hpp"
#include "tricover/topomap.hpp"
#include "tricover/trigrid.hpp"
#include "tricover/world.hpp"
