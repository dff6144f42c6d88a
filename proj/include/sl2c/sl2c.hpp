#pragma once

#include "sl2c/catalog.hpp"
#include "sl2c/coalgebra.hpp"
#include "sl2c/curvature_formulas.hpp"
#include "sl2c/dynamics.hpp"
#include "sl2c/errors.hpp"
#include "sl2c/expr.hpp"
#include "sl2c/geometry.hpp"
#include "sl2c/phase.hpp"
#include "sl2c/scalar.hpp"
