#pragma once

#include "sldcn/adaptive.hpp"
#include "sldcn/config.hpp"
#include "sldcn/discretization.hpp"
#include "sldcn/energy.hpp"
#include "sldcn/error.hpp"
#include "sldcn/harness.hpp"
#include "sldcn/io.hpp"
#include "sldcn/legendre.hpp"
#include "sldcn/operators.hpp"
#include "sldcn/potential.hpp"
#include "sldcn/rng.hpp"
#include "sldcn/scheme.hpp"
#include "sldcn/spectral.hpp"
