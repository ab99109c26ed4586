#pragma once

#include "polyode/expr.hpp"
#include "polyode/ode.hpp"
#include "polyode/integrate.hpp"
#include "polyode/quadrature.hpp"
#include "polyode/candidates.hpp"
#include "polyode/criteria.hpp"
#include "polyode/closed.hpp"
#include "polyode/equation_spec.hpp"
