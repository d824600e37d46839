#pragma once

#include "qmcvr/normal.hpp"
#include "qmcvr/randomize.hpp"
#include "qmcvr/sobol.hpp"
