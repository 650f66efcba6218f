#pragma once

#include "ltl/gradcore/adam.hpp"
#include "ltl/gradcore/checkpoint.hpp"
#include "ltl/gradcore/gradcheck.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"
#include "ltl/gradcore/rng.hpp"
