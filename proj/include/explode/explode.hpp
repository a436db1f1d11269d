#pragma once

#include "explode/analysis.hpp"
#include "explode/error.hpp"
#include "explode/finite_system.hpp"
#include "explode/operator.hpp"
#include "explode/scalar.hpp"
#include "explode/serialize.hpp"
#include "explode/shift_system.hpp"
#include "explode/sysdef.hpp"
#include "explode/weights.hpp"
