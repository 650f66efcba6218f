#pragma once

#include "ltl/latentparsers/gumbel.hpp"
#include "ltl/latentparsers/spinn.hpp"
#include "ltl/latentparsers/treelstm.hpp"
