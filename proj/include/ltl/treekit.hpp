#pragma once

#include "ltl/treekit/binary_tree.hpp"
#include "ltl/treekit/bracketed.hpp"
#include "ltl/treekit/generators.hpp"
#include "ltl/treekit/labeled_tree.hpp"
#include "ltl/treekit/transitions.hpp"
