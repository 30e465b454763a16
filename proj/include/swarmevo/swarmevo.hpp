#pragma once

#include "swarmevo/archive.hpp"
#include "swarmevo/config.hpp"
#include "swarmevo/coverage.hpp"
#include "swarmevo/errors.hpp"
#include "swarmevo/evolution.hpp"
#include "swarmevo/fitness.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/kinematics.hpp"
#include "swarmevo/kriging.hpp"
#include "swarmevo/mission.hpp"
#include "swarmevo/neat/genome.hpp"
#include "swarmevo/neat/genome_io.hpp"
#include "swarmevo/neat/network.hpp"
#include "swarmevo/neat/population.hpp"
#include "swarmevo/neat/reproduction.hpp"
#include "swarmevo/parallel.hpp"
#include "swarmevo/plot.hpp"
#include "swarmevo/random.hpp"
#include "swarmevo/scenario.hpp"
#include "swarmevo/sensors.hpp"
#include "swarmevo/tasks.hpp"
#include "swarmevo/trial.hpp"
