#pragma once

#include "histwalk/config.hpp"
#include "histwalk/distributions.hpp"
#include "histwalk/errors.hpp"
#include "histwalk/experiments.hpp"
#include "histwalk/extended_real.hpp"
#include "histwalk/model.hpp"
#include "histwalk/parallel.hpp"
#include "histwalk/random.hpp"
#include "histwalk/ratefn.hpp"
#include "histwalk/report_json.hpp"
#include "histwalk/simulator.hpp"
#include "histwalk/stats.hpp"
#include "histwalk/theory.hpp"
