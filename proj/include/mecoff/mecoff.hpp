#pragma once

#include "mecoff/model.hpp"
#include "mecoff/schedule.hpp"
#include "mecoff/correlation.hpp"
#include "mecoff/allocate.hpp"
#include "mecoff/tune.hpp"
#include "mecoff/random.hpp"
#include "mecoff/scenario.hpp"
#include "mecoff/methods.hpp"
#include "mecoff/harness.hpp"
