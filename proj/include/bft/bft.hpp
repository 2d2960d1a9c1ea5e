#pragma once

#include "bft/bayesfactor.hpp"
#include "bft/density.hpp"
#include "bft/distributions.hpp"
#include "bft/models.hpp"
#include "bft/quadrature.hpp"
#include "bft/rng.hpp"
#include "bft/sampler.hpp"
#include "bft/simulation.hpp"
#include "bft/stats.hpp"
#include "bft/version.hpp"
