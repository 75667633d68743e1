#pragma once

#include "forestrot/error.hpp"
#include "forestrot/quadrature.hpp"
#include "forestrot/growth.hpp"
#include "forestrot/carbon.hpp"
#include "forestrot/rotation.hpp"
#include "forestrot/optimizer.hpp"
#include "forestrot/random.hpp"
#include "forestrot/parallel.hpp"
#include "forestrot/simulation.hpp"
#include "forestrot/sweep.hpp"
#include "forestrot/config.hpp"
#include "forestrot/output.hpp"
#include "forestrot/app.hpp"
