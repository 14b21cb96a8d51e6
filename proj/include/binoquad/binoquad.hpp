#pragma once

#include "binoquad/composite.hpp"
#include "binoquad/error_model.hpp"
#include "binoquad/expr.hpp"
#include "binoquad/kahan.hpp"
#include "binoquad/measure.hpp"
#include "binoquad/rules.hpp"
