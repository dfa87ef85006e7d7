#pragma once

#include "relbel/classify.hpp"
#include "relbel/decision.hpp"
#include "relbel/discretization.hpp"
#include "relbel/error.hpp"
#include "relbel/evidence.hpp"
#include "relbel/io.hpp"
#include "relbel/limits.hpp"
#include "relbel/model.hpp"
#include "relbel/numeric.hpp"
#include "relbel/regress.hpp"
