#pragma once

#include "ltl/parsemetrics/metrics.hpp"
#include "ltl/parsemetrics/parse_set.hpp"
#include "ltl/parsemetrics/report.hpp"
