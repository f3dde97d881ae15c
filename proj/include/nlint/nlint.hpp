#pragma once

#include "nlint/config.hpp"
#include "nlint/constants.hpp"
#include "nlint/errors.hpp"
#include "nlint/fringe.hpp"
#include "nlint/physics.hpp"
#include "nlint/random.hpp"
#include "nlint/spectra.hpp"
#include "nlint/sweep.hpp"
