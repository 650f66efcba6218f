#pragma once

#include "ltl/trainer/classifier.hpp"
#include "ltl/trainer/config.hpp"
#include "ltl/trainer/corpus.hpp"
#include "ltl/trainer/gradient_suite.hpp"
#include "ltl/trainer/model.hpp"
#include "ltl/trainer/reinforce.hpp"
#include "ltl/trainer/search.hpp"
#include "ltl/trainer/synthetic.hpp"
#include "ltl/trainer/train.hpp"
