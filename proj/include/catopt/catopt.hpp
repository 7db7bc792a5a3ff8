#pragma once

#include "catopt/bench.hpp"
#include "catopt/config.hpp"
#include "catopt/gradient_descent.hpp"
#include "catopt/model.hpp"
#include "catopt/oracle.hpp"
#include "catopt/problems.hpp"
#include "catopt/solver.hpp"
#include "catopt/trs.hpp"
#include "catopt/types.hpp"
