#pragma once

#include "ltl/encoders/cells.hpp"
#include "ltl/encoders/embeddings.hpp"
#include "ltl/encoders/leaf.hpp"
#include "ltl/encoders/lstm.hpp"
