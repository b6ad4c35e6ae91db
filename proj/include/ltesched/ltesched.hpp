#pragma once

#include "analytics.hpp"
#include "channel.hpp"
#include "error.hpp"
#include "expint.hpp"
#include "ftgs_solver.hpp"
#include "linkadapt.hpp"
#include "scenario_io.hpp"
#include "schedulers.hpp"
#include "sim_engine.hpp"
#include "units.hpp"
