#pragma once

#include "criteria.hpp"
#include "dist.hpp"
#include "io.hpp"
#include "numeric.hpp"
#include "offspring.hpp"
#include "operator.hpp"
#include "simulator.hpp"
#include "thinning.hpp"
